# trace_ring(tensors, which_net, which_env)
# Generated by ttc 0.1.0. Do not edit by hand.
#
# tensors = [P, Q, R]
# which_net: network to contract, defaults to 1
# which_env: 0 contracts the network as drawn; M > 0 contracts the
#            environment of the M-th tensor of a closed network
#
# network 1: 3 tensors, closed, 36 mults (optimal)
#     most expensive step: chi^3
#     environments: which_env = 1..3, 117 mults in total
#
# Requires an importable `ncon` module.

from ncon import ncon
import numpy as np


def trace_ring(tensors, which_net=None, which_env=0):
    P = tensors[0]
    Q = tensors[1]
    R = tensors[2]
    if which_net is None:
        which_net = 1
    if which_net == 1:
        if which_env == 0:
            return ncon([P, Q, R], [[1, 2, 4, 2], [1, 3], [3, 4]], [2, 1, 3, 4])
        if which_env == 1:
            return ncon([Q, R, np.eye(P.shape[1])], [[-1, 3], [3, -3], [-2, -4]], [3])
        if which_env == 2:
            return ncon([P, R], [[-1, 2, 4, 2], [-2, 4]], [2, 4])
        if which_env == 3:
            return ncon([P, Q], [[1, 2, -2, 2], [1, -1]], [2, 1])
        raise ValueError("which_env must be between 0 and 3 for network 1")
    raise ValueError("which_net must be one of 1")
