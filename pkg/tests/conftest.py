"""Shared independent oracles for the test suite.

Everything here is built from first principles (explicit kron products,
dense matrix exponentials, eigenvalue-based entropies, explicit projector
updates) so the package code paths are checked against genuinely separate
constructions.
"""

import numpy as np
import pytest

# 2x2 operators in the x-eigenstate basis, ordering (|+>, |->).
# sigma^x is diagonal; sigma^z exchanges the two states.
SX = np.array([[1.0, 0.0], [0.0, -1.0]])
SZ_FLIP = np.array([[0.0, 1.0], [1.0, 0.0]])
RAISE = np.array([[0.0, 1.0], [0.0, 0.0]])   # |+><-|
LOWER = np.array([[0.0, 0.0], [1.0, 0.0]])   # |-><+|
ID2 = np.eye(2)


def kron_chain(ops):
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out


def site_op(op, site, n):
    ops = [ID2] * n
    ops[site] = op
    return kron_chain(ops)


def two_site_op(op_a, site_a, op_b, site_b, n):
    ops = [ID2] * n
    ops[site_a] = op_a
    ops[site_b] = op_b
    return kron_chain(ops)


def oracle_rwa_hamiltonian(n, coupling, field):
    """Flip-flop hopping plus transverse field, built from kron products."""
    h = np.zeros((2 ** n, 2 ** n))
    for i in range(n - 1):
        h += -coupling * (two_site_op(LOWER, i, RAISE, i + 1, n)
                          + two_site_op(RAISE, i, LOWER, i + 1, n))
    for i in range(n):
        h += -field * site_op(SX, i, n)
    return h


def oracle_ising_hamiltonian(n, coupling, field):
    """Full transverse-field Ising Hamiltonian from kron products."""
    h = np.zeros((2 ** n, 2 ** n))
    for i in range(n - 1):
        h += -coupling * two_site_op(SZ_FLIP, i, SZ_FLIP, i + 1, n)
    for i in range(n):
        h += -field * site_op(SX, i, n)
    return h


def single_flip_index(site, n):
    """Basis index of the state with 1-based `site` flipped (site 1 = MSB)."""
    return 1 << (n - site)


def evolve_dense(h, psi0, t):
    evals, evecs = np.linalg.eigh(h)
    return evecs @ (np.exp(-1j * evals * t) * (evecs.conj().T @ psi0))


def oracle_subspace_amplitudes(n, coupling, field, times):
    """A_m(t) from the full 2^n rotating-wave evolution, projected."""
    h = oracle_rwa_hamiltonian(n, coupling, field)
    psi0 = np.zeros(2 ** n, dtype=complex)
    psi0[single_flip_index(1, n)] = 1.0
    evals, evecs = np.linalg.eigh(h)
    coeff = evecs.conj().T @ psi0
    idx = [single_flip_index(m, n) for m in range(1, n + 1)]
    rows = evecs[idx, :]
    phases = np.exp(-1j * np.outer(evals, times))
    return rows @ (phases * coeff[:, None])


def von_neumann_entropy(rho):
    """Base-2 entropy from the eigenvalues of an explicit matrix."""
    evals = np.linalg.eigvalsh(rho)
    evals = np.clip(evals.real, 0.0, 1.0)
    evals = evals[evals > 1e-300]
    return float(-(evals * np.log2(evals)).sum())


def partial_trace_first(rho4):
    """Trace out the first qubit of a 4x4 matrix."""
    r = rho4.reshape(2, 2, 2, 2)
    return np.einsum("abad->bd", r)


def partial_trace_second(rho4):
    r = rho4.reshape(2, 2, 2, 2)
    return np.einsum("abcb->ac", r)


def oracle_mutual_information(rho4):
    return (von_neumann_entropy(partial_trace_second(rho4))
            + von_neumann_entropy(partial_trace_first(rho4))
            - von_neumann_entropy(rho4))


def oracle_concurrence(rho4):
    """Spin-flip eigenvalue formula on the explicit 4x4 matrix."""
    sy = np.array([[0.0, -1.0j], [1.0j, 0.0]])
    flip = np.kron(sy, sy)
    m = rho4 @ flip @ rho4.conj() @ flip
    evals = np.sort(np.abs(np.linalg.eigvals(m).real))
    roots = np.sqrt(evals)
    return max(0.0, roots[3] - roots[2] - roots[1] - roots[0])


def bloch_projector(theta, phi):
    n = np.array([np.sin(theta) * np.cos(phi),
                  np.sin(theta) * np.sin(phi),
                  np.cos(theta)])
    paulis = np.array([[[0, 1], [1, 0]],
                       [[0, -1j], [1j, 0]],
                       [[1, 0], [0, -1]]], dtype=complex)
    ndots = np.tensordot(n, paulis, axes=1)
    return 0.5 * (np.eye(2) + ndots), 0.5 * (np.eye(2) - ndots)


def oracle_holevo(rho4, theta, phi):
    """chi for one projective measurement on the second qubit, explicitly."""
    s_a = von_neumann_entropy(partial_trace_second(rho4))
    chi = s_a
    for proj in bloch_projector(theta, phi):
        m = np.kron(np.eye(2), proj)
        post = m @ rho4 @ m
        p = float(np.trace(post).real)
        if p <= 0:
            continue
        chi -= p * von_neumann_entropy(partial_trace_second(post) / p)
    return chi


def oracle_cc_exhaustive(rho4, n_theta=1024, n_phi=2048):
    """Exhaustive-grid maximum of chi; explicit projector updates.

    Evaluated in theta-batches with batched 2x2 eigenvalues to stay fast
    while remaining an independent construction.
    """
    thetas = np.linspace(0.0, 0.5 * np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    s_a = von_neumann_entropy(partial_trace_second(rho4))
    r = rho4.reshape(2, 2, 2, 2)
    best = -np.inf
    for theta in thetas:
        st, ct = np.sin(theta), np.cos(theta)
        nx = st * np.cos(phis)
        ny = st * np.sin(phis)
        ndots = np.zeros((n_phi, 2, 2), dtype=complex)
        ndots[:, 0, 0] = ct
        ndots[:, 1, 1] = -ct
        ndots[:, 0, 1] = nx - 1j * ny
        ndots[:, 1, 0] = nx + 1j * ny
        chi = np.full(n_phi, s_a)
        for sgn in (1.0, -1.0):
            proj = 0.5 * (np.eye(2)[None, :, :] + sgn * ndots)
            # rho_A^out[a, a'] = sum_{b b'} rho[a b a' b'] proj[b', b]
            rho_a = np.einsum("abcd,gdb->gac", r, proj)
            p = np.trace(rho_a, axis1=1, axis2=2).real
            evals = np.linalg.eigvalsh(rho_a)
            with np.errstate(divide="ignore", invalid="ignore"):
                lam = np.clip(evals.real / p[:, None], 0.0, 1.0)
                terms = np.where(lam > 0, -lam * np.log2(np.where(
                    lam > 0, lam, 1.0)), 0.0).sum(axis=1)
            chi -= np.where(p > 0, p * terms, 0.0)
        best = max(best, float(chi.max()))
    return best


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def random_end_pair_parameters(rng, n_states, pure=False):
    """(p1, pN, coherence) triples satisfying the positivity bound."""
    out = []
    for _ in range(n_states):
        p1 = rng.uniform(0.0, 1.0)
        pn = rng.uniform(0.0, 1.0 - p1) if not pure else 1.0 - p1
        scale = 1.0 if pure else rng.uniform(0.0, 1.0)
        mag = scale * np.sqrt(p1 * pn)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        out.append((p1, pn, mag * np.exp(1j * phase)))
    return out
