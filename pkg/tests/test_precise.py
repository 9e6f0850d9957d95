import numpy as np

from spectime.experiments import matched_gap
from spectime.gbp import gbp_zeros, jacobi_matrix
from spectime.precise import perturbed_eigenvalues, reference_zeros, to_complex


def test_reference_zeros_agree_with_double():
    for n in (10, 28):
        ref = to_complex(reference_zeros(n, 2))
        assert np.max(np.abs(ref - gbp_zeros(n, 2).zeros)) < 1e-14


def test_perturbed_eigenvalues_of_jacobi_are_zeros():
    n = 12
    z = gbp_zeros(n, 3).zeros
    start = -z * (1 + 1e-4)
    ev = to_complex(perturbed_eigenvalues(jacobi_matrix(n, 3, exact=True), start))
    assert matched_gap(ev, -z) < 1e-13
