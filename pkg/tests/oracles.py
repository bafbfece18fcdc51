"""Shared independent oracles and generators for the test suite.

Everything here recomputes expectations through a different route than the
code under test: explicit classical averages over mixtures, dense quantum
states, or brute-force evaluation.
"""

import numpy as np

import sepcert as sc
from sepcert.seporacle import make_rng


def mixture_moment(mixture, monomial) -> float:
    """Classical expectation of a Bloch-variable monomial under a mixture:
    the direct weighted product over components."""
    total = 0.0
    for p, state in zip(mixture.weights, mixture.states):
        term = 1.0
        for site, comp in monomial.factors:
            term *= state.bloch[site, comp]
        total += p * term
    return total


def haar_state(n: int, rng) -> np.ndarray:
    rng = make_rng(rng)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return v / np.linalg.norm(v)


def random_state_dataset(n: int, seed) -> sc.CorrelationDataset:
    """Full correlator set of a Haar-random pure state."""
    return sc.state_dataset(haar_state(n, seed))


def drop_entries(ds: sc.CorrelationDataset, frac: float, seed) -> sc.CorrelationDataset:
    """Remove a random fraction of the stored correlators."""
    rng = make_rng(seed)
    one = {k: v for k, v in ds.one_items() if rng.random() >= frac}
    two = {k: v for k, v in ds.two_items() if rng.random() >= frac}
    if not one and not two:
        two = dict(list(ds.two_items())[:1])
    return sc.CorrelationDataset(ds.n_sites, one, two)


def entangled_state_dataset(n: int, seed, min_lambda=1e-3):
    """A Haar-state dataset whose level-1 certification detects entanglement;
    retries the seed stream until one is found."""
    rng = make_rng(seed)
    for _ in range(60):
        ds = sc.state_dataset(haar_state(n, rng))
        sol, prob = sc.certify(ds)
        if sol.lambda_star > min_lambda:
            return ds, sol, prob
    raise AssertionError("no entangled Haar dataset found in 60 draws")


def expm_thermal_correlator(spec, temperature, i, j, axis):
    """Second exact-diagonalization route: Gibbs state via the dense matrix
    exponential instead of the spectral decomposition."""
    import scipy.linalg as sla
    from sepcert.physmodels import hamiltonian, _site_op

    h = hamiltonian(spec).toarray()
    rho = sla.expm(-h / max(temperature, 1e-3))
    rho /= np.trace(rho)
    op = (_site_op(spec.n, i, axis) @ _site_op(spec.n, j, axis)).toarray()
    return float(np.real(np.sum(rho.T * op)))
