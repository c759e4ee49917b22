# matmul(tensors, which_net, which_env)
# Generated by ttc 0.1.0. Do not edit by hand.
#
# tensors = [A, B]
# which_net: network to contract, defaults to 1
# which_env: 0 contracts the network as drawn; M > 0 contracts the
#            environment of the M-th tensor of a closed network
#
# network 1: 2 tensors, 2 open indices, 8 mults (optimal)
#     most expensive step: d^3
#
# Requires an importable `ncon` module.

from ncon import ncon


def matmul(tensors, which_net=None, which_env=0):
    A = tensors[0]
    B = tensors[1]
    if which_net is None:
        which_net = 1
    if which_net == 1:
        if which_env == 0:
            return ncon([A, B], [[-1, 1], [1, -2]], [1])
        raise ValueError("network 1 has open indices; environments exist only for closed networks")
    raise ValueError("which_net must be one of 1")
