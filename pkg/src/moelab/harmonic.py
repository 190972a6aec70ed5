"""Group-algebra convolution and norm bounds for left convolution operators.

``lambda(f)`` acts on l2(G) by ``omega -> f * omega``.  On a finite window
``W`` of the group its compression has entries ``f(x y^-1)`` for ``x, y`` in
``W``; the spectral norm of any compression is a lower bound for the operator
norm, and for a finite group with the full window it is the norm itself.

Upper bounds come from a small registry: Cauchy-Schwarz on the support,
Haagerup's length decomposition on free groups, and the free-product
composition constant ``5 sqrt(2) max p_i`` for supports inside the radius-2
ball.  Nothing stronger than those is ever claimed.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from itertools import combinations, product as cartesian
from typing import Iterable, Mapping

import numpy as np

from .groups import (
    DirectPower,
    Element,
    Free,
    FreeProduct,
    GroupError,
    GroupSpec,
    all_elements,
    ball,
    get_budget,
)

POWER_TOL = 1e-10
POWER_MAXITER = 10_000
RATIO_TOL = 1e-9
FREE_PRODUCT_CONSTANT = 5 * math.sqrt(2)


class InequalityViolation(AssertionError):
    """A norm inequality failed against an exact oracle."""

    def __init__(self, report: "VerificationReport"):
        self.report = report
        super().__init__(
            f"{report.lemma}: ratio {report.max_ratio!r} exceeds bound {report.bound!r} on {report.group_spec}"
        )


# ---------------------------------------------------------------------------
# algebra elements


@dataclass(frozen=True)
class AlgebraElement:
    """Finitely supported complex function on a group; zeros are not stored."""

    group: GroupSpec
    coeffs: Mapping[Element, complex]

    def __post_init__(self):
        clean = {}
        for g, c in self.coeffs.items():
            c = complex(c)
            if c != 0:
                clean[self.group.validate(g)] = c
        object.__setattr__(self, "coeffs", clean)

    @property
    def support(self) -> list[Element]:
        return list(self.coeffs)

    def __getitem__(self, g: Element) -> complex:
        return self.coeffs.get(g, 0j)

    def __len__(self) -> int:
        return len(self.coeffs)

    def norm2(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def l1(self) -> float:
        return sum(abs(c) for c in self.coeffs.values())

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _same_group(self, other)
        out = dict(self.coeffs)
        for g, c in other.coeffs.items():
            out[g] = out.get(g, 0) + c
        return AlgebraElement(self.group, out)

    def __mul__(self, c: complex) -> "AlgebraElement":
        return AlgebraElement(self.group, {g: c * v for g, v in self.coeffs.items()})

    __rmul__ = __mul__

    def restrict(self, keep) -> "AlgebraElement":
        return AlgebraElement(self.group, {g: c for g, c in self.coeffs.items() if keep(g)})

    def adjoint(self) -> "AlgebraElement":
        """``g -> conj(f(g^-1))``, so that ``lambda(f)^* = lambda(f.adjoint())``."""
        G = self.group
        return AlgebraElement(G, {G.inverse(g): c.conjugate() for g, c in self.coeffs.items()})

    def to_dict(self) -> dict:
        return {self.group.format(g): [c.real, c.imag] for g, c in self.coeffs.items()}


def delta(G: GroupSpec, g: Element, c: complex = 1.0) -> AlgebraElement:
    return AlgebraElement(G, {g: c})


def uniform(G: GroupSpec, E: Iterable[Element], normalized: bool = False) -> AlgebraElement:
    E = list(dict.fromkeys(E))
    c = 1 / math.sqrt(len(E)) if normalized else 1.0
    return AlgebraElement(G, {g: c for g in E})


def _same_group(f: AlgebraElement, psi: AlgebraElement) -> None:
    if f.group != psi.group:
        raise GroupError(f"group mismatch: {f.group} vs {psi.group}")


def convolve(f: AlgebraElement, psi: AlgebraElement) -> AlgebraElement:
    """``(f * psi)(g) = sum_h f(h) psi(h^-1 g)``, i.e. sum over ``g = h k``."""
    _same_group(f, psi)
    G = f.group
    out: dict[Element, complex] = {}
    for h, a in f.coeffs.items():
        for k, b in psi.coeffs.items():
            g = G.multiply(h, k)
            out[g] = out.get(g, 0) + a * b
    return AlgebraElement(G, out)


# ---------------------------------------------------------------------------
# compressions


@dataclass(frozen=True)
class Compression:
    basis: tuple[Element, ...]
    matrix: np.ndarray
    full: bool = False

    @property
    def dim(self) -> int:
        return len(self.basis)


def default_window(G: GroupSpec, R: int, budget: int | None = None) -> tuple[list[Element], bool]:
    """The full group when finite (and within budget), else the positive ball."""
    budget = get_budget(budget)
    if G.order is not None and G.order <= budget:
        return all_elements(G, budget), True
    return ball(G, R, budget), False


def translation_matrices(G: GroupSpec, basis: list[Element], elements: Iterable[Element]) -> dict:
    """Compressed ``lambda(g)`` for each ``g``: entry ``(x, y) = 1`` iff ``x = g y``."""
    index = {x: i for i, x in enumerate(basis)}
    n = len(basis)
    out = {}
    for g in elements:
        m = np.zeros((n, n))
        for j, y in enumerate(basis):
            i = index.get(G.multiply(g, y))
            if i is not None:
                m[i, j] = 1.0
        out[g] = m
    return out


def compression_matrix(G: GroupSpec, f: AlgebraElement, basis: list[Element]) -> np.ndarray:
    index = {x: i for i, x in enumerate(basis)}
    n = len(basis)
    m = np.zeros((n, n), dtype=complex)
    for j, y in enumerate(basis):
        for h, c in f.coeffs.items():
            i = index.get(G.multiply(h, y))
            if i is not None:
                m[i, j] += c
    return m


def compression(
    G: GroupSpec, f: AlgebraElement, R: int, basis: list[Element] | None = None, budget: int | None = None
) -> Compression:
    if f.group != G:
        raise GroupError(f"function lives on {f.group}, not {G}")
    full = False
    if basis is None:
        basis, full = default_window(G, R, budget)
    return Compression(tuple(basis), compression_matrix(G, f, list(basis)), full)


def power_iteration_norm(
    m: np.ndarray, tol: float = POWER_TOL, maxiter: int = POWER_MAXITER, seed: int = 0
) -> tuple[float, bool]:
    """Top singular value of ``m`` by power iteration on ``m^* m``.

    Each iterate's Rayleigh quotient is at most the true value, so the
    returned number is a lower bound whether or not it converged.
    """
    n = m.shape[1]
    if n == 0 or not np.any(m):
        return 0.0, True
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    best = 0.0
    for _ in range(maxiter):
        w = m @ v
        sigma = float(np.linalg.norm(w))
        best = max(best, sigma)
        if sigma == 0.0:
            return best, True
        u = m.conj().T @ w
        # residual of the Gram eigenpair bounds the distance to an eigenvalue
        if float(np.linalg.norm(u - sigma**2 * v)) <= tol * max(sigma**2, 1.0):
            return best, True
        v = u / np.linalg.norm(u)
    return best, False


def moment_lower_bound(f: AlgebraElement, depth: int = 8, budget: int | None = None) -> float:
    """``max_n ((f~ * f)^{*n}(e))^{1/2n}``, a lower bound on the norm.

    ``(f~ * f)^{*n}(e) = <(lambda(f)^* lambda(f))^n delta_e, delta_e>``.
    Stops early once the support of the iterate leaves the budget.
    """
    budget = get_budget(budget)
    G = f.group
    h = convolve(f.adjoint(), f)
    e = G.identity()
    cur = h
    best = 0.0
    for n in range(1, depth + 1):
        val = cur[e].real
        if val > 0:
            best = max(best, val ** (1 / (2 * n)))
        if n == depth:
            break
        if len(cur) * len(h) > budget * 64:
            break
        cur = convolve(cur, h)
    return best


@dataclass(frozen=True)
class NormBound:
    lower: float
    upper: float
    lower_method: str
    upper_method: str
    exact: bool = False
    converged: bool = True

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ValueError("norm bounds must be nonnegative")

    def to_dict(self) -> dict:
        return asdict(self)


def _free_length_bound(f: AlgebraElement) -> float:
    by_len: dict[int, float] = {}
    for g, c in f.coeffs.items():
        by_len[len(g)] = by_len.get(len(g), 0.0) + abs(c) ** 2
    return sum((m + 1) * math.sqrt(s) for m, s in by_len.items())


def b2_constant(G: GroupSpec, budget: int | None = None) -> tuple[int, int, str]:
    """Registered constant ``c * sqrt(r)`` bounding ``||lambda(f)|| / ||f||_2``
    over ``supp(f)`` inside the radius-2 ball, as ``(c, r, method)``.
    """
    if isinstance(G, Free):
        ball_size = 1 + G.rank + G.rank**2
        if ball_size < 14:
            return 1, ball_size, "cauchy-schwarz"
        return 1, 14, "haagerup-length"
    if isinstance(G, FreeProduct):
        if G.factor_count == 1:
            return b2_constant(G.factor(0), budget)
        consts = [b2_constant(spec, budget) for spec in G.distinct_factors()]
        if any(c != 1 for c, _, _ in consts):
            raise GroupError("factor constants must be plain square roots")
        return 5, 2 * max(r for _, r, _ in consts), "free-product"
    if G.order is not None:
        return 1, len(ball(G, 2, budget)), "exact-finite"
    return 1, len(ball(G, 2, budget)), "cauchy-schwarz"


def upper_bounds(G: GroupSpec, f: AlgebraElement, budget: int | None = None) -> dict[str, float]:
    """Every registered upper bound on ``||lambda(f)||`` that applies to ``f``."""
    n2 = f.norm2()
    bounds = {"cauchy-schwarz": math.sqrt(len(f)) * n2}
    if isinstance(G, Free):
        bounds["haagerup-length"] = _free_length_bound(f)
    if isinstance(G, FreeProduct) and G.factor_count > 1 and f.coeffs:
        if all(isinstance(G.positive_length(g, 2, get_budget(budget)), int) for g in f.coeffs):
            c, r, _ = b2_constant(G, budget)
            bounds["free-product"] = c * math.sqrt(r) * n2
    return bounds


def operator_norm(
    G: GroupSpec, f: AlgebraElement, R: int = 3, moment_depth: int = 8, budget: int | None = None
) -> NormBound:
    comp = compression(G, f, R, budget=budget)
    if comp.full:
        exact = float(np.linalg.norm(comp.matrix, 2)) if comp.dim else 0.0
        return NormBound(exact, exact, "dense-svd", "dense-svd", exact=True)
    pi, converged = power_iteration_norm(comp.matrix)
    mom = moment_lower_bound(f, moment_depth, budget)
    if mom > pi:
        lower, lower_method = mom, "moment"
    else:
        lower, lower_method = pi, "power-iteration"
    ups = upper_bounds(G, f, budget)
    upper_method = min(ups, key=ups.get)
    upper = ups[upper_method]
    if lower > upper:
        # floating dust only; an upper bound below a certified lower bound is a bug
        if lower - upper > 1e-9 * max(1.0, upper):
            raise AssertionError(f"lower bound {lower} exceeds registered bound {upper_method}={upper}")
        lower = upper
    return NormBound(lower, upper, lower_method, upper_method, exact=False, converged=converged)


def haagerup_constant(
    G: GroupSpec, E: Iterable[Element], R: int = 3, samples: int = 64, seed: int = 0, budget: int | None = None
) -> NormBound:
    """Bounds on ``sup ||lambda(f)||`` over unit ``f`` supported on ``E``.

    ``sqrt(|E|)`` is always an upper bound.  The uniform nonnegative function
    attains it on finite groups.
    """
    E = list(dict.fromkeys(E))
    if not E:
        return NormBound(0.0, 0.0, "empty", "empty", exact=True)
    upper = math.sqrt(len(E))
    u = uniform(G, E, normalized=True)
    if G.order is not None and G.order <= get_budget(budget):
        basis, _ = default_window(G, R, budget)
        lower = float(np.linalg.norm(compression_matrix(G, u, basis), 2))
        exact = abs(lower - upper) <= 1e-9 * upper
        return NormBound(min(lower, upper), upper, "uniform-dense", "cauchy-schwarz", exact=exact)
    basis = ball(G, R, budget)
    rng = np.random.default_rng(seed)
    lower = float(np.linalg.norm(compression_matrix(G, u, basis), 2))
    for _ in range(samples):
        c = rng.standard_normal(len(E)) + 1j * rng.standard_normal(len(E))
        c /= np.linalg.norm(c)
        f = AlgebraElement(G, dict(zip(E, c)))
        lower = max(lower, float(np.linalg.norm(compression_matrix(G, f, basis), 2)))
    return NormBound(min(lower, upper), upper, "compression-samples", "cauchy-schwarz")


# ---------------------------------------------------------------------------
# inequality verifiers


@dataclass
class VerificationReport:
    lemma: str
    group_spec: str
    params: dict
    trials: int
    seed: int
    max_ratio: float
    bound: float
    margin: float
    witnesses: list = field(default_factory=list)
    exact: bool = True
    samples: int = 0

    @property
    def passed(self) -> bool:
        return self.margin >= -RATIO_TOL

    def to_dict(self) -> dict:
        d = asdict(self)
        d["status"] = "PASS" if self.passed else "FAIL"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class _Tally:
    """Running maximum of ``||lambda(phi)|| / ||phi||_2`` with a few witnesses."""

    def __init__(self, bound: float, keep: int = 5):
        self.bound = bound
        self.keep = keep
        self.max_ratio = 0.0
        self.count = 0
        self.witnesses: list[dict] = []
        self.violations: list[dict] = []

    def add(self, ratio: float, kind: str, index: int):
        self.count += 1
        rec = {"kind": kind, "index": index, "ratio": ratio}
        if ratio > self.max_ratio:
            self.max_ratio = ratio
        if ratio > self.bound + RATIO_TOL:
            self.violations.append(rec)
        self.witnesses.append(rec)
        self.witnesses.sort(key=lambda r: -r["ratio"])
        del self.witnesses[self.keep :]


def _sample_coefficients(size: int, trials: int, seed: int):
    """Deterministic corner cases, then seeded complex Gaussians."""
    for i in range(size):
        v = np.zeros(size, dtype=complex)
        v[i] = 1.0
        yield "basis", i, v
    yield "uniform", 0, np.ones(size, dtype=complex)
    if size > 1:
        yield "alternating-sign", 0, np.array([(-1) ** i for i in range(size)], dtype=complex)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        yield "gaussian", t, rng.standard_normal(size) + 1j * rng.standard_normal(size)


def _finish(report: VerificationReport, tally: _Tally) -> VerificationReport:
    report.max_ratio = tally.max_ratio
    report.margin = tally.bound - tally.max_ratio
    report.witnesses = tally.violations[:5] or tally.witnesses
    report.samples = tally.count
    if not report.passed and report.exact:
        raise InequalityViolation(report)
    return report


def row_norms(phi: Mapping[tuple[Element, Element], complex]) -> dict[Element, float]:
    """``theta(s) = ||phi(., s)||_2`` for a function on a product ``G x H``."""
    acc: dict[Element, float] = {}
    for (a, s), c in phi.items():
        acc[s] = acc.get(s, 0.0) + abs(c) ** 2
    return {s: math.sqrt(v) for s, v in acc.items()}


def product_operator(mats_g: dict, mats_h: dict, phi: Mapping[tuple[Element, Element], complex]) -> np.ndarray:
    """Compressed ``lambda_{G x H}(phi)`` as a sum of Kronecker products."""
    out = None
    for (a, s), c in phi.items():
        term = c * np.kron(mats_g[a], mats_h[s])
        out = term if out is None else out + term
    return out


def verify_product_inequality(
    G: GroupSpec,
    H: GroupSpec,
    E: Iterable[Element],
    F: Iterable[Element],
    p: float,
    q: float,
    trials: int = 200,
    seed: int = 0,
    R: int = 3,
    budget: int | None = None,
) -> VerificationReport:
    """Check ``||lambda_{GxH}(phi)|| <= p q ||phi||_2`` for ``phi`` on ``E x F``.

    Exact when both groups are finite; otherwise compressions give lower
    bounds only and a failure is reported, not raised.
    """
    E = list(dict.fromkeys(E))
    F = list(dict.fromkeys(F))
    basis_g, full_g = default_window(G, R, budget)
    basis_h, full_h = default_window(H, R, budget)
    mats_g = translation_matrices(G, basis_g, E)
    mats_h = translation_matrices(H, basis_h, F)
    support = list(cartesian(E, F))
    bound = p * q
    tally = _Tally(bound)
    for kind, idx, coeffs in _sample_coefficients(len(support), trials, seed):
        phi = dict(zip(support, coeffs))
        norm = float(np.linalg.norm(product_operator(mats_g, mats_h, phi), 2))
        tally.add(norm / float(np.linalg.norm(coeffs)), kind, idx)
    report = VerificationReport(
        lemma="product",
        group_spec=f"{G} x {H}",
        params={
            "E": [G.format(x) for x in E],
            "F": [H.format(x) for x in F],
            "p": p,
            "q": q,
            "window": [len(basis_g), len(basis_h)],
        },
        trials=trials,
        seed=seed,
        max_ratio=0.0,
        bound=bound,
        margin=0.0,
        exact=full_g and full_h,
    )
    return _finish(report, tally)


def power_support(G: GroupSpec, n: int, m: int, E: Iterable[Element]) -> list[tuple]:
    """Tuples in ``E^n`` with exactly ``m`` non-neutral coordinates."""
    e = G.identity()
    nontrivial = [x for x in dict.fromkeys(E) if x != e]
    out = []
    for coords in combinations(range(n), m):
        for values in cartesian(nontrivial, repeat=m):
            g = [e] * n
            for i, v in zip(coords, values):
                g[i] = v
            out.append(tuple(g))
    return out


def verify_power_inequality(
    G: GroupSpec,
    n: int,
    m: int,
    p: float,
    trials: int = 200,
    seed: int = 0,
    E: Iterable[Element] | None = None,
    R: int = 3,
    budget: int | None = None,
) -> VerificationReport:
    """Check ``||lambda_{G^n}(phi)|| <= C(n,m)^{1/2} p^m ||phi||_2``.

    ``phi`` is supported on tuples from ``E^n`` (default ``E`` = radius-2
    ball) having exactly ``m`` non-neutral coordinates.
    """
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    if E is None:
        E = ball(G, 2, budget)
    Gn = DirectPower(G, n)
    support = power_support(G, n, m, E)
    basis, full = default_window(Gn, R, budget)
    mats = translation_matrices(Gn, basis, support)
    bound = math.comb(n, m) ** 0.5 * p**m
    tally = _Tally(bound)
    for kind, idx, coeffs in _sample_coefficients(len(support), trials, seed):
        op = sum(c * mats[g] for g, c in zip(support, coeffs))
        norm = float(np.linalg.norm(op, 2))
        tally.add(norm / float(np.linalg.norm(coeffs)), kind, idx)
    report = VerificationReport(
        lemma="power",
        group_spec=str(Gn),
        params={"n": n, "m": m, "p": p, "support_size": len(support), "window": len(basis)},
        trials=trials,
        seed=seed,
        max_ratio=0.0,
        bound=bound,
        margin=0.0,
        exact=full,
    )
    return _finish(report, tally)


def factor_constants(factors: list[GroupSpec], budget: int | None = None) -> list[float]:
    """Exact radius-2 constants ``p_i = sqrt(|B_2|)`` of finite factors."""
    out = []
    for spec in factors:
        if spec.order is None:
            raise GroupError(f"factor {spec} is infinite; no exact constant")
        b2 = ball(spec, 2, budget)
        nb = haagerup_constant(spec, b2, budget=budget)
        if not nb.exact:
            raise AssertionError(f"uniform function failed to attain sqrt|B2| on {spec}")
        out.append(nb.upper)
    return out


def verify_freeprod_inequality(
    factors: list[GroupSpec],
    R: int = 4,
    trials: int = 200,
    seed: int = 0,
    budget: int | None = None,
) -> VerificationReport:
    """Falsification run for ``||lambda(phi)|| <= 5 sqrt(2) max p_i ||phi||_2``.

    ``phi`` ranges over functions on the radius-2 ball of the free product;
    norms are compressions to the radius-``R`` ball, hence lower bounds.  An
    observed lower bound above the constant is a counterexample and raises.
    """
    G = FreeProduct(tuple((f, 1) for f in factors))
    p = factor_constants(factors, budget)
    bound = FREE_PRODUCT_CONSTANT * max(p)
    support = ball(G, 2, budget)
    basis = ball(G, R, budget)
    mats = translation_matrices(G, basis, support)
    tally = _Tally(bound)

    def ratio(coeffs, supp):
        op = sum(c * mats[g] for g, c in zip(supp, coeffs))
        return float(np.linalg.norm(op, 2)) / float(np.linalg.norm(coeffs))

    for kind, idx, coeffs in _sample_coefficients(len(support), trials, seed):
        tally.add(ratio(coeffs, support), kind, idx)
    # one factor at a time: the factor's own exact constant is reachable
    for k in range(G.factor_count):
        supp_k = [g for g in support if all(i == k for i, _ in g)]
        tally.add(ratio(np.ones(len(supp_k), dtype=complex), supp_k), f"factor-{k}-uniform", k)
    report = VerificationReport(
        lemma="free-product",
        group_spec=str(G),
        params={"R": R, "p": p, "support_size": len(support), "window": len(basis)},
        trials=trials,
        seed=seed,
        max_ratio=0.0,
        bound=bound,
        margin=0.0,
        exact=False,
    )
    report = _finish(report, tally)
    if not report.passed:
        # compressions are lower bounds, so exceeding the constant is a genuine counterexample
        raise InequalityViolation(report)
    return report
