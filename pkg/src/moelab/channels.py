"""Random-walk channels on l2(G) and their complementary channels.

For generators ``g_1..g_N`` the left channel averages ``Ad(lambda(g_i))`` and
the right channel averages ``Ad(rho(g_i))`` with ``rho(g) delta_x =
delta_{x g^-1}``.  States live on a finite window of the group, by default the
ball of radius ``R`` for the symmetric word metric, because the right channel
produces elements like ``g_i g_j^-1``.

Complementary outputs are ``N^k x N^k`` matrices indexed by tuples of
generator indices.  For a state supported on the window ``W`` (or ``W^k``) the
entry ``(i, j)`` is ``N^-k sum_x rho[h x, x]`` with ``h = g_i^-1 g_j`` taken
coordinate-wise; only pairs with both points in the window contribute, so
truncation introduces no error.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .groups import BudgetError, GroupSpec, get_budget, symmetric_ball

HERMITIAN_TOL = 1e-12
EIG_CLAMP = 1e-10
TRACE_TOL = 1e-12
MAX_POWER = 3
STALL_TOL = 1e-13
STALL_ITERS = 25


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class DensityState:
    """Density matrix on the product basis ``basis^power``.

    Rows and columns follow ``itertools.product(basis, repeat=power)``.
    """

    basis: tuple
    matrix: np.ndarray
    power: int = 1

    def __post_init__(self):
        d = len(self.basis) ** self.power
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (d, d):
            raise InvalidStateError(f"matrix shape {m.shape} does not match basis dimension {d}")
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def check(self, tol: float = HERMITIAN_TOL) -> "DensityState":
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
            raise InvalidStateError("matrix is not Hermitian")
        if abs(self.trace() - 1) > TRACE_TOL * max(1, self.dim):
            raise InvalidStateError(f"trace {self.trace()} != 1")
        low = float(np.linalg.eigvalsh(m).min())
        if low < -EIG_CLAMP:
            raise InvalidStateError(f"negative eigenvalue {low}")
        return self

    @classmethod
    def pure(cls, basis, vector, power: int = 1) -> "DensityState":
        v = np.asarray(vector, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(tuple(basis), np.outer(v, v.conj()), power)

    @classmethod
    def delta(cls, G: GroupSpec, g=None, basis=None, power: int = 1) -> "DensityState":
        """``xi_g`` (``xi_e`` by default), tensored ``power`` times."""
        g = G.identity() if g is None else g
        basis = tuple(basis) if basis is not None else (g,)
        v1 = np.zeros(len(basis), dtype=complex)
        v1[basis.index(g)] = 1.0
        v = v1
        for _ in range(power - 1):
            v = np.kron(v, v1)
        return cls.pure(basis, v, power)


def random_state(basis, rng: np.random.Generator, power: int = 1, rank: int | None = None) -> DensityState:
    """Random mixed state ``A A^* / tr`` with a complex Gaussian ``A``."""
    d = len(basis) ** power
    r = d if rank is None else rank
    a = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = a @ a.conj().T
    m = (m + m.conj().T) / 2
    return DensityState(tuple(basis), m / np.trace(m).real, power)


def window(G: GroupSpec, R: int, budget: int | None = None) -> list:
    return symmetric_ball(G, R, budget)


# ---------------------------------------------------------------------------
# the channels themselves


def _translate(G: GroupSpec, rho: DensityState, maps) -> DensityState:
    if rho.power != 1:
        raise ValueError("channels act on l2(G); use complementary_output for tensor powers")
    basis = list(rho.basis)
    index = {x: i for i, x in enumerate(basis)}
    images = []
    for move in maps:
        idx = []
        for x in rho.basis:
            y = move(x)
            if y not in index:
                index[y] = len(basis)
                basis.append(y)
            idx.append(index[y])
        images.append(np.array(idx))
    out = np.zeros((len(basis), len(basis)), dtype=complex)
    n = len(maps)
    for idx in images:
        out[np.ix_(idx, idx)] += rho.matrix / n
    return DensityState(tuple(basis), out)


def apply_left(G: GroupSpec, rho: DensityState) -> DensityState:
    """``(1/N) sum_i lambda(g_i) rho lambda(g_i)^*``; basis grows by one layer."""
    return _translate(G, rho, [lambda x, s=s: G.multiply(s, x) for s in G.generators])


def apply_right(G: GroupSpec, rho: DensityState) -> DensityState:
    """``(1/N) sum_i rho(g_i) rho rho(g_i)^*`` with ``rho(g) delta_x = delta_{x g^-1}``."""
    return _translate(G, rho, [lambda x, s=G.inverse(s): G.multiply(x, s) for s in G.generators])


def compose_left_right(G: GroupSpec, rho: DensityState) -> DensityState:
    return apply_left(G, apply_right(G, rho))


def kraus_sum_check(G: GroupSpec, basis) -> float:
    """``max |sum_i T_i^* T_i - Id|`` for the left Kraus operators on the
    window interior, i.e. points whose translates stay in the window."""
    n = len(G.generators)
    index = {x: i for i, x in enumerate(basis)}
    acc = np.zeros((len(basis), len(basis)))
    for s in G.generators:
        t = np.zeros((len(basis), len(basis)))
        for j, x in enumerate(basis):
            i = index.get(G.multiply(s, x))
            if i is not None:
                t[i, j] = 1.0
        acc += t.T @ t / n
    interior = [
        j for j, x in enumerate(basis) if all(G.multiply(s, x) in index for s in G.generators)
    ]
    sub = acc[np.ix_(interior, interior)]
    return float(np.max(np.abs(sub - np.eye(len(interior))), initial=0.0))


# ---------------------------------------------------------------------------
# complementary channel


def pair_operators(G: GroupSpec, basis) -> np.ndarray:
    """Stack ``T[i*N + j]`` of partial permutations on the window:
    ``T[i*N + j][y, x] = 1`` iff ``y = g_i^-1 g_j x``."""
    gens = G.generators
    n = len(gens)
    index = {x: i for i, x in enumerate(basis)}
    d = len(basis)
    out = np.zeros((n * n, d, d))
    for i, gi in enumerate(gens):
        gi_inv = G.inverse(gi)
        for j, gj in enumerate(gens):
            h = G.multiply(gi_inv, gj)
            for c, x in enumerate(basis):
                r = index.get(G.multiply(h, x))
                if r is not None:
                    out[i * n + j, r, c] = 1.0
    return out


def _pairs_to_matrix(t: np.ndarray, n: int, k: int) -> np.ndarray:
    """Tensor with ``k`` pair axes (each ``i*n + j``) -> ``n^k x n^k`` matrix."""
    t = t.reshape((n, n) * k)
    order = [2 * c for c in range(k)] + [2 * c + 1 for c in range(k)]
    return t.transpose(order).reshape(n**k, n**k)


def complementary_output(G: GroupSpec, rho: DensityState, k: int | None = None, budget: int | None = None) -> np.ndarray:
    """Complementary channel of the ``k``-fold left channel applied to ``rho``."""
    k = rho.power if k is None else k
    if k != rho.power:
        raise ValueError(f"state has tensor power {rho.power}, asked for {k}")
    if rho.dim > get_budget(budget) ** 2:
        raise ValueError(f"state dimension {rho.dim} exceeds budget")
    n = len(G.generators)
    d = len(rho.basis)
    T = pair_operators(G, rho.basis)
    # rows y_1..y_k then columns x_1..x_k
    cur = rho.matrix.reshape((d,) * (2 * k))
    for c in range(k):
        # contract y_c (axis c) and x_c (axis k) with T[p, y, x]; new pair axis goes last
        cur = np.tensordot(cur, T, axes=([0, k - c], [1, 2]))
    # after the loop the pair axes appear in order 1..k
    return _pairs_to_matrix(cur, n, k) / n**k


def complementary_output_kraus(G: GroupSpec, rho: DensityState) -> np.ndarray:
    """Reference route: explicit Kraus matrices ``N^{-1/2} lambda(g_i)`` from
    the window into its one-layer extension, ``tr(T_a rho T_b^*)``."""
    k = rho.power
    basis = list(rho.basis)
    ext = list(basis)
    index = {x: i for i, x in enumerate(ext)}
    for s in G.generators:
        for x in basis:
            y = G.multiply(s, x)
            if y not in index:
                index[y] = len(ext)
                ext.append(y)
    n = len(G.generators)
    kraus = []
    for s in G.generators:
        t = np.zeros((len(ext), len(basis)))
        for j, x in enumerate(basis):
            t[index[G.multiply(s, x)], j] = 1.0 / math.sqrt(n)
        kraus.append(t)
    ops = kraus
    for _ in range(k - 1):
        ops = [np.kron(a, b) for a in ops for b in kraus]
    out = np.zeros((len(ops), len(ops)), dtype=complex)
    for a, ta in enumerate(ops):
        left = ta @ rho.matrix
        for b, tb in enumerate(ops):
            out[a, b] = np.trace(left @ tb.conj().T)
    return out


# ---------------------------------------------------------------------------
# entropies


def von_neumann_entropy(rho) -> float:
    """``-sum a ln a`` over eigenvalues (nats), with ``0 ln 0 = 0``."""
    m = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho)
    w = np.linalg.eigvalsh(m)
    if w.min(initial=0.0) < -EIG_CLAMP:
        raise InvalidStateError(f"negative eigenvalue {w.min()}")
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def renyi2_entropy(rho) -> float:
    m = rho.matrix if isinstance(rho, DensityState) else np.asarray(rho)
    return float(-math.log(np.real(np.trace(m @ m))))


def composed_entropy_on_delta(G: GroupSpec) -> float:
    """Entropy of the composed channel's output on ``xi_e``."""
    return von_neumann_entropy(compose_left_right(G, DensityState.delta(G)))


def composed_entropy_formula(n: int) -> float:
    """``2 ln N - ln N / N``: the value when all ``g_i g_j^-1`` (i != j) differ."""
    return 2 * math.log(n) - math.log(n) / n


# ---------------------------------------------------------------------------
# the l2 deviation bound


@dataclass
class DeviationReport:
    deviation: float
    bound: float
    renyi2: float
    entropy: float
    chain_lhs: float
    chain_rhs: float

    @property
    def margin(self) -> float:
        return self.bound - self.deviation

    @property
    def passed(self) -> bool:
        return self.margin >= -1e-9 and self.chain_lhs >= self.chain_rhs - 1e-9

    def to_dict(self) -> dict:
        return {
            "deviation": self.deviation,
            "bound": self.bound,
            "margin": self.margin,
            "renyi2_nats": self.renyi2,
            "entropy_nats": self.entropy,
            "chain_lhs_nats": self.chain_lhs,
            "chain_rhs_nats": self.chain_rhs,
            "status": "PASS" if self.passed else "FAIL",
        }


def deviation_bound(n: int, q: float, multiplicity: int, k: int) -> float:
    """``N^-k ((q^2 M + N)^k - N^k)^{1/2}`` with ``M`` the pair multiplicity."""
    return n ** (-k) * math.sqrt((q * q * multiplicity + n) ** k - n**k)


def entropy_chain_bound(n: int, q: float, multiplicity: int, k: int) -> float:
    """``k ln N - 2 ln(1 + [(1 + q^2 M / N)^k - 1]^{1/2})``."""
    return k * math.log(n) - 2 * math.log1p(math.sqrt((1 + q * q * multiplicity / n) ** k - 1))


def l2_deviation_check(
    G: GroupSpec, q: float, multiplicity: int, k: int, rho: DensityState
) -> DeviationReport:
    """Compare ``||Phi^c(rho) - I/N^k||_2`` with the Hilbert-Schmidt bound and
    run the entropy chain that follows from it."""
    n = len(G.generators)
    out = complementary_output(G, rho, k)
    dev = float(np.linalg.norm(out - np.eye(n**k) / n**k))
    return DeviationReport(
        deviation=dev,
        bound=deviation_bound(n, q, multiplicity, k),
        renyi2=renyi2_entropy(out),
        entropy=von_neumann_entropy(out),
        chain_lhs=-2 * math.log(float(np.linalg.norm(out))),
        chain_rhs=entropy_chain_bound(n, q, multiplicity, k),
    )


# ---------------------------------------------------------------------------
# minimum output entropy over pure states in a window


class _PureObjective:
    """Entropy of ``Phi^c(v v^*)`` for ``v`` on ``W^k`` and its gradient."""

    def __init__(self, G: GroupSpec, basis, k: int):
        self.n = len(G.generators)
        self.k = k
        self.d = len(basis)
        # A_{ij} = N^-k (x) T_{j_c i_c}, so rho_ij = v^H A_ij v
        self.T = pair_operators(G, basis)

    def _images(self, v: np.ndarray) -> np.ndarray:
        """``Y[p_1..p_k] = (T_{p_1} x ... x T_{p_k}) v``, pair axes first."""
        k, d = self.k, self.d
        # layout (p_1..p_c, y_1..y_c, x_{c+1}..x_k) after c steps
        cur = v.reshape((d,) * k)
        for c in range(k):
            cur = np.tensordot(self.T, cur, axes=([2], [2 * c]))
            cur = np.moveaxis(cur, [0, 1], [c, 2 * c + 1])
        return cur

    def evaluate(self, v: np.ndarray, grad: bool = True):
        n, k = self.n, self.k
        Y = self._images(v)
        P = n * n
        Yf = Y.reshape(P**k, -1)
        # entry (j, i) pair index uses T_{j i}: rho_ij = N^-k v^H Y[(j_c, i_c)]
        inner = (Yf @ v.conj()) / n**k
        m_ji = _pairs_to_matrix(inner, n, k)  # [j, i] = v^H T_{j i} v / N^k
        rho = m_ji.T
        rho = (rho + rho.conj().T) / 2
        w, U = np.linalg.eigh(rho)
        wp = np.clip(w, 0.0, None)
        pos = wp > 0
        value = float(-np.sum(wp[pos] * np.log(wp[pos])))
        if not grad:
            return value, rho, None
        logs = np.log(np.clip(w, 1e-300, None))
        W = -(U * (logs + 1)) @ U.conj().T
        # Q v = N^-k sum_{ij} W_ji Y[(j, i)]
        coeff = _matrix_to_pairs(W, n, k)
        g = (coeff.reshape(-1) @ Yf) / n**k
        return value, rho, g.reshape(-1)


def _matrix_to_pairs(m: np.ndarray, n: int, k: int) -> np.ndarray:
    """Inverse of ``_pairs_to_matrix``."""
    t = m.reshape((n,) * (2 * k))
    order = []
    for c in range(k):
        order += [c, k + c]
    return t.transpose(order).reshape(-1)


@dataclass
class MOEResult:
    group_spec: str
    R: int
    k: int
    restarts: int
    seed: int
    best_value: float
    converged: bool
    state: np.ndarray = field(repr=False)
    basis: tuple = field(repr=False, default=())
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "group_spec": self.group_spec,
            "R": self.R,
            "k": self.k,
            "restarts": self.restarts,
            "seed": self.seed,
            "best_value": self.best_value,
            "units": "nats",
            "converged": self.converged,
            "state_norm_check": abs(float(np.linalg.norm(self.state)) - 1.0),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _descend(obj: _PureObjective, v: np.ndarray, tol: float, maxiter: int):
    v = v / np.linalg.norm(v)
    value, _, g = obj.evaluate(v)
    step = 1.0
    stalled = 0
    for it in range(maxiter):
        g = g - np.vdot(v, g).real * v
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return value, v, True, it
        # minima on the rank-deficient boundary have unbounded gradients
        if stalled >= STALL_ITERS:
            return value, v, False, it
        while True:
            cand = v - step * g
            cand /= np.linalg.norm(cand)
            new_value = obj.evaluate(cand, grad=False)[0]
            if new_value <= value - 1e-4 * step * gnorm**2:
                break
            step /= 2
            if step < 1e-14:
                return value, v, False, it
        v = cand
        prev_value = value
        value, _, g = obj.evaluate(v)
        stalled = stalled + 1 if prev_value - value < STALL_TOL else 0
        step = min(step * 2, 1e3)
    return value, v, False, maxiter


def minimize_output_entropy(
    G: GroupSpec,
    R: int = 3,
    k: int = 1,
    restarts: int = 32,
    seed: int = 0,
    tol: float = 1e-9,
    maxiter: int = 500,
    warm_start: bool = True,
    budget: int | None = None,
) -> MOEResult:
    """Best entropy of ``(Phi^c)^{(x)k}(xi_v)`` over unit ``v`` on ``W^k``.

    ``W`` is the symmetric ball of radius ``R``.  The result is an upper
    bound on the window-restricted minimum.  With ``warm_start`` the best
    vector from radius ``R - 1`` (a prefix of the window) is one of the
    starting points, which makes the value nonincreasing in ``R``.
    """
    if k > MAX_POWER:
        raise ValueError(f"tensor power {k} above cap {MAX_POWER}")
    budget = get_budget(budget)
    basis = window(G, R, budget)
    d = len(basis)
    if d**k > budget:
        raise BudgetError(f"MOE window of {G} to power {k}", d**k, budget)
    obj = _PureObjective(G, basis, k)
    starts = []
    e_vec = np.zeros(d**k, dtype=complex)
    e_vec[0] = 1.0
    starts.append(e_vec)
    if warm_start and R > 0:
        prev = minimize_output_entropy(G, R - 1, k, restarts, seed, tol, maxiter, True, budget)
        dp = len(prev.basis)
        emb = np.zeros((d,) * k, dtype=complex)
        emb[(slice(0, dp),) * k] = prev.state.reshape((dp,) * k)
        starts.append(emb.reshape(-1))
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        starts.append(rng.standard_normal(d**k) + 1j * rng.standard_normal(d**k))
    best = None
    total_iters = 0
    for v0 in starts:
        value, v, conv, its = _descend(obj, v0, tol, maxiter)
        total_iters += its
        # strict improvement only, so ties keep the earliest start
        if best is None or value < best[0]:
            best = (value, v, conv)
    value, v, conv = best
    return MOEResult(str(G), R, k, restarts, seed, value, conv, v, tuple(basis), total_iters)
