"""Acceptance scorecard: one check function per criterion.

Each check returns a :class:`CheckResult`; ``run_all`` collects them for
``pseudospec verify-all``. Test-function generators used by the checks live
here too so the CLI and the test suite draw from the same families.
"""

from __future__ import annotations

import inspect
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cartan import GroupShape, symmetry_type
from .characters import check_vandermonde_identity, character_density
from .diagrams import (
    Signature,
    diagram_sign,
    iter_split_diagrams,
    iter_merged_diagrams,
    iter_splits,
    slot_map,
)
from .exppoly import ExpPoly
from .projectors import (
    OrbitalFamily,
    kernel_transform_check,
    cycle_series_check,
    chain_series_check,
    fourier_inversion_check,
    random_family,
    sum_split_projectors,
    sum_mode_projectors,
    split_projector_pairing,
    most_continuous_pairing,
    series_projector_pairing,
    weyl_average,
    diagram_sum_check,
)


@dataclass
class CheckResult:
    criterion: int
    name: str
    passed: bool
    metrics: dict = field(default_factory=dict)
    seconds: float = 0.0
    time_limit: float = float("inf")

    @property
    def within_time(self) -> bool:
        return self.seconds <= self.time_limit

    def to_json(self) -> dict:
        return {
            "criterion": self.criterion,
            "name": self.name,
            "passed": self.passed,
            "metrics": _jsonable(self.metrics),
            "seconds": round(self.seconds, 3),
            "time_limit": self.time_limit,
            "within_time": self.within_time,
        }


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def shapes(max_n: int):
    """All (p, q) with p >= q >= 1 and p + q <= max_n."""
    for n in range(2, max_n + 1):
        for q in range(1, n // 2 + 1):
            yield GroupShape(n - q, q)


# -- generators -----------------------------------------------------------------------


def odd_gaussian_poly(rng: np.random.Generator, n_terms: int = 3, max_half_power: int = 2) -> ExpPoly:
    """Random sum c t^{2j+1} e^{-w t^2} of a single hyperbolic coordinate."""
    f = ExpPoly(0, 0, 1)
    for _ in range(n_terms):
        f = f + ExpPoly.term(
            None, 1, complex(rng.normal(), rng.normal()), (), (), [0],
            [2 * int(rng.integers(0, max_half_power + 1)) + 1],
            [round(float(rng.uniform(0.5, 1.5)), 3)], dims=(0, 0),
        )
    return f


def odd_theta_profile(rng: np.random.Generator, modes: int = 200, decay: float = 0.7) -> ExpPoly:
    """t^e e^{-w t^2} sum_j c_j decay^|j| e^{i j theta}, e odd: many theta-modes."""
    e = 2 * int(rng.integers(0, 2)) + 1
    w = round(float(rng.uniform(0.5, 1.5)), 3)
    f = ExpPoly(0, 0, 1)
    for j in range(-modes, modes + 1):
        c = decay ** abs(j) * complex(rng.normal(), rng.normal())
        f = f + ExpPoly.term(None, 1, c, (), (), [j], [e], [w], dims=(0, 0))
    return f


def trig_poly(rng: np.random.Generator, degree: int) -> ExpPoly:
    f = ExpPoly(1, 0, 0)
    for a in range(-degree, degree + 1):
        f = f + ExpPoly.term(None, 0, complex(rng.normal(), rng.normal()), [a], (), dims=(1, 0))
    return f


def triangle_wave(phi):
    """|phi| on [-pi, pi], extended periodically: Fourier coefficients ~ 1/k^2."""
    x = (np.asarray(phi, dtype=float) + math.pi) % (2 * math.pi) - math.pi
    return np.abs(x)


def u11_family_flat_at_origin(rng: np.random.Generator, n_terms: int = 3) -> OrbitalFamily:
    """U(1,1) family whose H_1 member vanishes at t = 0 (t-powers >= 2)."""
    shape = GroupShape(1, 1)
    f1 = ExpPoly.zero(shape, 1)
    for _ in range(n_terms):
        f1 = f1 + ExpPoly.term(
            shape, 1, complex(rng.normal(), rng.normal()), (), (),
            [int(rng.integers(-2, 3))], [2 * int(rng.integers(1, 3))],
            [round(float(rng.uniform(0.5, 1.5)), 3)],
        )
    f0 = ExpPoly.zero(shape, 0)
    for _ in range(n_terms):
        f0 = f0 + ExpPoly.term(
            shape, 0, complex(rng.normal(), rng.normal()),
            [int(rng.integers(-2, 3))], [int(rng.integers(-2, 3))],
        )
    return OrbitalFamily(shape, {0: f0, 1: weyl_average(f1, shape, 1)})


def strict_signature(shape: GroupShape, r: int, A, rng: np.random.Generator) -> Signature:
    size = shape.n - 2 * r
    c = tuple(sorted((int(x) for x in rng.choice(np.arange(-6, 7), size, replace=False)), reverse=True))
    m = tuple(int(x) for x in rng.integers(-3, 4, r))
    rho = tuple(sorted((float(x) for x in rng.uniform(0.2, 2.0, r)), reverse=True))
    return Signature(shape, r, tuple(A), c, m, rho, strict=True)


# -- oracles ---------------------------------------------------------------------------


def cycle_parity(perm) -> int:
    """Sign of a permutation from its cycle decomposition."""
    seen = [False] * len(perm)
    sign = 1
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# -- checks ------------------------------------------------------------------------------


def _timed(criterion: int, name: str, limit: float, body: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    passed, metrics = body()
    return CheckResult(criterion, name, bool(passed), metrics, time.perf_counter() - t0, limit)


def check_diagram_counts(max_n: int = 6) -> CheckResult:
    def body():
        bad = []
        cases = 0
        for shape in shapes(max_n):
            for r in range(shape.q + 1):
                for k in range(r, shape.q + 1):
                    want = math.factorial(k) * math.factorial(shape.n - 2 * r) // math.factorial(k - r)
                    got = sum(1 for _ in iter_merged_diagrams(shape, r, k))
                    cases += 1
                    if got != want:
                        bad.append([shape.p, shape.q, r, k, got, want])
        return not bad, {"cases": cases, "mismatches": bad}

    return _timed(1, "diagram counts", 10.0, body)


def check_sign_oracle(max_n: int = 5) -> CheckResult:
    def body():
        diagrams = 0
        bad = []
        for shape in shapes(max_n):
            for r in range(shape.q + 1):
                for k in range(r, shape.q + 1):
                    families = [iter_merged_diagrams(shape, r, k)]
                    for A in iter_splits(shape, r):
                        families.append(iter_split_diagrams(Signature(shape, r, A), k))
                    for fam in families:
                        for dg in fam:
                            diagrams += 1
                            oracle = cycle_parity(slot_map(shape, r, k, dg.pieces))
                            if diagram_sign(dg, shape, r, k) != oracle or dg.sign != oracle:
                                bad.append([shape.p, shape.q, r, k, str(dg.key())])
        return not bad, {"diagrams": diagrams, "mismatches": bad[:10]}

    return _timed(2, "diagram sign oracle", 30.0, body)


def check_character_symmetry(seed: int = 0, samples: int = 100, tol: float = 1e-10, max_n: int = 5) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        cases = 0
        for shape in shapes(max_n):
            for r in range(shape.q + 1):
                for k in range(r, shape.q + 1):
                    for A in iter_splits(shape, r):
                        sig = strict_signature(shape, r, A, rng)
                        rep = symmetry_type(shape, k, lambda h: character_density(sig, k, h), samples=samples, rng=rng, tol=tol)
                        worst = max(worst, rep.skew_violation)
                        cases += 1
        return worst <= tol, {"cases": cases, "max_violation": worst, "tolerance": tol}

    return _timed(3, "character skew-symmetry", 60.0, body)


def check_operator_identity(seed: int = 1, samples: int = 50, tol: float = 1e-7, max_n: int = 4) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        cases = []
        for shape in shapes(max_n):
            for r in range(shape.q + 1):
                for k in range(r, shape.q + 1):
                    A = next(iter_splits(shape, r))
                    sig = strict_signature(shape, r, A, rng)
                    rep = check_vandermonde_identity(sig, k, samples=samples, rng=rng, tol=tol)
                    worst = max(worst, rep.max_rel_error)
                    cases.append([shape.p, shape.q, r, k, rep.max_rel_error])
        return worst <= tol, {"max_rel_error": worst, "tolerance": tol, "cases": cases}

    return _timed(4, "operator identity", 120.0, body)


def check_kernel_transforms(seed: int = 2, count: int = 10, tol: float = 1e-6) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        errs = {"coth": [], "tanh": []}
        for _ in range(count):
            f = odd_gaussian_poly(rng)
            for v in errs:
                errs[v].append(kernel_transform_check(f, v)["error"])
        worst = max(max(e) for e in errs.values())
        return worst <= tol, {"max_error": worst, "tolerance": tol, "errors": errs}

    return _timed(5, "Fourier-side kernel identities", 60.0, body)


def check_cycle_series(seed: int = 3, count: int = 5, cutoffs=(10, 20, 40), tol: float = 1e-4) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        curves = []
        ok = True
        for _ in range(count):
            res = cycle_series_check(odd_theta_profile(rng), cutoffs)
            errs = [c["error"] for c in res["curve"]]
            curves.append(errs)
            ok = ok and errs[-1] <= tol and all(a > b for a, b in zip(errs, errs[1:]))
        return ok, {"cutoffs": list(cutoffs), "errors": curves, "tolerance": tol}

    return _timed(6, "cycle series in m", 120.0, body)


def check_chain_series(seed: int = 4, count: int = 5, cutoff: int = 60, tol: float = 1e-4, min_slope: float = 1.9) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        rows = []
        ok = True
        for _ in range(count):
            res = chain_series_check(odd_theta_profile(rng), cutoff=cutoff)
            rows.append({k: res[k] for k in ("error", "raw_error", "decay_slope_diff", "decay_bounds")})
            ok = ok and res["error"] <= tol and res["decay_slope_diff"] >= min_slope and res["decay_bounded"]
        return ok, {"cutoff": cutoff, "tolerance": tol, "rows": rows}

    return _timed(7, "chain double series", 180.0, body)


def check_fourier_inversion(seed: int = 5, degrees=(0, 1, 3, 6), tol: float = 1e-12) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for d in degrees:
            f = trig_poly(rng, d)
            for K in (d, d + 2, d + 10):
                worst = max(worst, fourier_inversion_check(f, K)["error"])
        decay = [fourier_inversion_check(triangle_wave, K)["decay_constant"] for K in (16, 64, 256)]
        bounded = decay[-1] <= 1.01 * decay[0]
        return worst <= tol and bounded, {"max_error": worst, "tolerance": tol, "triangle_decay_constants": decay}

    return _timed(8, "Fourier inversion at 0", 10.0, body)


def check_diagram_sum_independence(seed: int = 6, tol: float = 1e-4) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        rows = []
        ok = True
        for shape in (GroupShape(1, 1), GroupShape(2, 1)):
            fam = random_family(shape, rng, max_mode=3)
            for k in range(1, shape.q + 1):
                for r in range(k + 1):
                    res = diagram_sum_check(fam.F(k), shape, r, k)
                    rows.append([shape.p, shape.q, r, k, res["diagrams"], res["pairwise_spread"], res["max_error_vs_closed"]])
                    ok = ok and res["pairwise_spread"] <= tol
        return ok, {"rows": rows, "tolerance": tol}

    return _timed(9, "diagram-sum independence", 300.0, body)


def check_remark_consistency(seed: int = 7, trials: int = 3, tol: float = 1e-12, max_n: int = 4) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for shape in shapes(max_n):
            for _ in range(trials):
                fam = random_family(shape, rng)
                a = series_projector_pairing(shape, shape.q, fam).value
                b = most_continuous_pairing(shape, fam).value
                worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
        return worst <= tol, {"max_rel_error": worst, "tolerance": tol}

    return _timed(10, "most continuous series: general vs specialised", 30.0, body)


def check_additivity(seed: int = 8, cutoff: int = 40, tol: float = 1e-3) -> CheckResult:
    def body():
        rng = np.random.default_rng(seed)
        shape = GroupShape(1, 1)
        rows = []
        worst = 0.0
        for _ in range(2):
            fam = u11_family_flat_at_origin(rng)
            # sum over m of the (A; c, m) projectors against the (A; c) one, r = 1
            sig = Signature(shape, 1, (), (), (0,), (1.0,))
            a = split_projector_pairing(sig, fam).value
            b = sum_mode_projectors(sig, fam, cutoff=cutoff).value
            e1 = abs(a - b) / max(abs(a), 1e-300)
            # sum over (A; c) of the split projectors against the series-0 one
            full = series_projector_pairing(shape, 0, fam).value
            res = sum_split_projectors(shape, 0, fam, cutoff=cutoff)
            e2 = abs(full - res.value) / max(abs(full), 1e-300)
            raw = complex(*res.truncation["raw"][0])
            rows.append({"sum_m": e1, "sum_Ac": e2, "sum_Ac_raw": abs(full - raw) / abs(full)})
            worst = max(worst, e1, e2)
        return worst <= tol, {"rows": rows, "tolerance": tol, "cutoff": cutoff}

    return _timed(11, "refinement additivity", 300.0, body)


def check_weyl_integration(seed: int = 9, tol: float = 0.02) -> CheckResult:
    from .smallgroup import SmoothGroupFunction, weyl_integration_check

    def body():
        rng = np.random.default_rng(seed)
        fs = [SmoothGroupFunction.random(rng) for _ in range(7)]
        rep = weyl_integration_check(fs[:2], fs[2:], tol=tol)
        return rep.passed, rep.to_json()

    return _timed(12, "Weyl integration on U(1,1)", 600.0, body)


def check_completeness(seed: int = 10, count: int = 5, tol: float = 0.02) -> CheckResult:
    from .smallgroup import SmoothGroupFunction, completeness_check

    def body():
        rng = np.random.default_rng(seed)
        fs = [SmoothGroupFunction.random(rng) for _ in range(count)]
        rep = completeness_check(fs, tol=tol)
        return rep.passed, rep.to_json()

    return _timed(13, "Plancherel completeness on U(1,1)", 1200.0, body)


CHECKS = {
    1: check_diagram_counts,
    2: check_sign_oracle,
    3: check_character_symmetry,
    4: check_operator_identity,
    5: check_kernel_transforms,
    6: check_cycle_series,
    7: check_chain_series,
    8: check_fourier_inversion,
    9: check_diagram_sum_independence,
    10: check_remark_consistency,
    11: check_additivity,
    12: check_weyl_integration,
    13: check_completeness,
}


def run_all(only=None, threads: int = 1, seed_offset: int = 0) -> list:
    """Run the selected checks (all by default); results sorted by criterion."""
    keys = sorted(only) if only else sorted(CHECKS)

    def one(key):
        fn = CHECKS[key]
        param = inspect.signature(fn).parameters.get("seed")
        if seed_offset and param is not None:
            return fn(seed=param.default + seed_offset)
        return fn()

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, keys))
    else:
        results = [one(k) for k in keys]
    return sorted(results, key=lambda r: r.criterion)
