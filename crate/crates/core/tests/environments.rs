mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ttc_core::environments::environment_operands;
use ttc_core::random::{random_network, random_tensors, NetworkShape};
use ttc_core::search::optimal_order_full;
use ttc_core::{
    compile_network, derive_environment_order, environment_network, ncon_execute, DenseTensor, EnvError, Label,
    LabeledNetwork,
};

use common::{fixture, numerical_gradient, rel_err};

fn scalar(net: &LabeledNetwork, tensors: &[DenseTensor]) -> f64 {
    ncon_execute(tensors, &net.label_lists(), None).unwrap().data()[0]
}

/// Contracts the environment of tensor `m` with its derived order.
fn environment(net: &LabeledNetwork, tensors: &[DenseTensor], m: usize) -> DenseTensor {
    let tree = optimal_order_full(net).unwrap();
    let env = environment_network(net, m).unwrap();
    let env_tree = derive_environment_order(net, &tree, m).unwrap();
    let ops = environment_operands(net, tensors, m).unwrap();
    ncon_execute(&ops, &env.label_lists(), Some(&env_tree.linearize())).unwrap()
}

fn check_reconstruction(net: &LabeledNetwork, tensors: &[DenseTensor]) {
    let total = scalar(net, tensors);
    for m in 1..=net.len() {
        let env = environment(net, tensors, m);
        assert_eq!(env.shape(), tensors[m - 1].shape(), "m = {m}");
        let recon: f64 = env.data().iter().zip(tensors[m - 1].data()).map(|(a, b)| a * b).sum();
        assert!(
            rel_err(&[recon], &[total]) < 1e-10,
            "m = {m}: {recon} vs {total} for {:?}",
            net.label_lists()
        );
    }
}

fn check_gradient(net: &LabeledNetwork, tensors: &[DenseTensor], m: usize) {
    let env = environment(net, tensors, m);
    let shape = tensors[m - 1].shape().to_vec();
    let f = |x: &[f64]| {
        let mut probe = tensors.to_vec();
        probe[m - 1] = DenseTensor::new(shape.clone(), x.to_vec()).unwrap();
        scalar(net, &probe)
    };
    let grad = numerical_gradient(f, tensors[m - 1].data(), 1e-5);
    assert!(rel_err(env.data(), &grad) < 1e-5, "m = {m}");
}

#[test]
fn six_tensor_fixture_environments() {
    let net = compile_network(&fixture("six_closed.tnp"), 1).unwrap();
    assert!(net.closed());
    assert_eq!(net.len(), 6);
    for m in 1..=6 {
        assert_eq!(environment_network(&net, m).unwrap().len(), 5);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let tensors = random_tensors(&mut rng, &net);
    check_reconstruction(&net, &tensors);
    for m in 1..=6 {
        check_gradient(&net, &tensors, m);
    }
}

#[test]
fn random_closed_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let shape = NetworkShape {
        tensors: 2..=6,
        dims: 2..=4,
        trace_probability: 0.15,
        ..NetworkShape::default()
    }
    .closed();
    for case in 0..50 {
        let net = random_network(&mut rng, &shape);
        let tensors = random_tensors(&mut rng, &net);
        check_reconstruction(&net, &tensors);
        if case % 5 == 0 {
            check_gradient(&net, &tensors, 1 + case % net.len());
        }
    }
}

#[test]
fn removed_tensor_with_a_trace_gets_an_identity() {
    let net = compile_network(&fixture("trace_ring.tnp"), 1).unwrap();
    let env = environment_network(&net, 1).unwrap();
    assert_eq!(env.len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let tensors = random_tensors(&mut rng, &net);
    check_reconstruction(&net, &tensors);
    check_gradient(&net, &tensors, 1);
}

#[test]
fn trace_ab_environment_is_transpose() {
    let net = compile_network(&fixture("trace_ab.tnp"), 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let tensors = random_tensors(&mut rng, &net);
    let env = environment(&net, &tensors, 1);
    assert_eq!(env, tensors[1].permute(&[1, 0]));
}

#[test]
fn derived_orders_consume_the_environment_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let shape = NetworkShape {
        tensors: 2..=7,
        trace_probability: 0.2,
        ..NetworkShape::default()
    }
    .closed();
    for _ in 0..60 {
        let net = random_network(&mut rng, &shape);
        let tree = optimal_order_full(&net).unwrap();
        for m in 1..=net.len() {
            let env = environment_network(&net, m).unwrap();
            env.check_invariants().unwrap();
            let derived = derive_environment_order(&net, &tree, m).unwrap();
            let fresh = optimal_order_full(&env).unwrap();
            let mut a = derived.linearize();
            let mut b = fresh.linearize();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
            let mut internal: Vec<Label> = env.labels.keys().copied().filter(|&l| l > 0).collect();
            internal.sort_unstable();
            assert_eq!(a, internal);
            assert!(derived.total_cost() >= fresh.total_cost());
        }
    }
}

#[test]
fn aggregate_environment_cost_is_bounded() {
    let cases = [
        ("trace_ab.tnp", 1),
        ("six_closed.tnp", 1),
        ("trace_ring.tnp", 1),
        ("binary_mera.tnp", 4),
    ];
    for (name, net_no) in cases {
        let net = compile_network(&fixture(name), net_no).unwrap();
        let tree = optimal_order_full(&net).unwrap();
        let total: u128 = (1..=net.len())
            .map(|m| derive_environment_order(&net, &tree, m).unwrap().total_cost())
            .sum();
        let bound = 6 * net.len() as u128 * tree.total_cost();
        assert!(total <= bound, "{name}: {total} > {bound}");
    }
}

#[test]
fn open_networks_have_no_environments() {
    let net = compile_network(&fixture("matrix_chain.tnp"), 1).unwrap();
    let err = environment_network(&net, 1).unwrap_err();
    assert_eq!(err, EnvError::OpenNetwork);
    assert_eq!(err.code(), "E_ENV_OPEN_NETWORK");
}
