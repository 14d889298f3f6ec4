"""Sufficient convergence conditions and admissible activity bounds.

Criteria:

* ``thm_col1``: two-constant condition for the penetrable model with the
  corona volume in place of the exclusion-ball volume;
* ``easy``: closed-form special case of ``thm_col1`` (witness a = eps(r/R), A = 1 + ...);
* ``kp``: classical volume-scaling condition applied to the original activities;
* ``hsper`` / ``hs``: three-constant conditions for the colloid model (periodic
  box, non-strict; infinite volume, strict);
* ``suff_hs``: constructive witness search for ``hs``;
* ``pair``: heuristic bound from the effective pair potential alone (not rigorous).

The short names are stable identifiers used in JSON output and on the command line.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate, special

from .geometry import ball_volume, corona_volume, lens_volume, shell_fraction
from .interactions import MixtureParams


class Criterion(str, Enum):
    THM_COL1 = "thm_col1"
    EASY = "easy"
    KP = "kp"
    KP_BOUND = "kp_bound"
    HSPER = "hsper"
    HS = "hs"
    SUFF_HS = "suff_hs"
    PAIR = "pair"


class PreconditionError(ValueError):
    """The small-sphere activity is too large for any colloid witness to exist."""


@dataclass
class ConvergenceWitness:
    criterion: Criterion
    constants: dict = field(default_factory=dict)
    satisfied: bool = False
    admissible_zhat: float | None = None
    admissible_zR: float | None = None
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        self.criterion = Criterion(self.criterion)
        for k, v in self.constants.items():
            if v < 0:
                raise ValueError(f"constant {k} must be non-negative, got {v}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["criterion"] = self.criterion.value
        return out


def _volumes(params: MixtureParams):
    return (ball_volume(2 * params.R, params.d), corona_volume(params.R, params.r, params.d),
            ball_volume(params.R + params.r, params.d))


def eps(h: float) -> float:
    """Corona volume over |B(0, 2R)| as a function of r/R (d = 3)."""
    return shell_fraction(h)


def check_col1(params: MixtureParams, zhat: float, a: float, A: float) -> ConvergenceWitness:
    v2R, vc, _ = _volumes(params)
    lhs1 = v2R * math.exp(A) * zhat + vc * math.exp(a) * params.z_r
    lhs2 = vc * math.exp(A) * zhat
    ok = lhs1 <= A and lhs2 <= a
    return ConvergenceWitness(Criterion.THM_COL1, {"a": a, "A": A}, ok, zhat,
                              detail={"lhs1": lhs1, "rhs1": A, "lhs2": lhs2, "rhs2": a})


def easy_witness(params: MixtureParams) -> tuple[float, float]:
    """Closed-form witness: a = eps(r/R), A = 1 + z_r |corona| e^a."""
    _, vc, _ = _volumes(params)
    a = vc / ball_volume(2 * params.R, params.d)
    return a, 1.0 + params.z_r * vc * math.exp(a)


def max_zhat_easy(params: MixtureParams) -> tuple[float, float]:
    """Largest effective activity allowed by the closed-form witness, and the implied z_R."""
    v2R, vc, vex = _volumes(params)
    a = vc / v2R
    zh = math.exp(-1.0 - params.z_r * vc * math.exp(a)) / v2R
    return zh, zh * math.exp(params.z_r * vex)


def max_zR_kp(params: MixtureParams) -> float:
    """Bound on z_R implied by any witness of the volume-scaling conditions."""
    v2R, _, vex = _volumes(params)
    return math.exp(-1.0 - params.z_r * vex) / v2R


def improvement_ratio(params: MixtureParams) -> float:
    """(easy z_R bound) / (volume-scaling z_R bound), as the simplified exponential."""
    _, vc, vex = _volumes(params)
    return math.exp(params.z_r * (2 * vex - vc * math.exp(vc / ball_volume(2 * params.R, params.d))))


def check_kp_u1u2(params: MixtureParams, a: float, A: float, z_R: float | None = None) -> ConvergenceWitness:
    """Volume-scaling conditions with constants a (small) and A (large), on the original z_R."""
    v2R, _, vex = _volumes(params)
    z_R = params.z_R if z_R is None else z_R
    lhs1 = v2R * math.exp(A) * z_R + vex * math.exp(a) * params.z_r
    lhs2 = vex * math.exp(A) * z_R
    ok = lhs1 <= A and lhs2 <= a
    return ConvergenceWitness(Criterion.KP, {"a": a, "A": A}, ok, admissible_zR=max_zR_kp(params),
                              detail={"lhs1": lhs1, "rhs1": A, "lhs2": lhs2, "rhs2": a})


def check_easy(params: MixtureParams, zhat: float) -> ConvergenceWitness:
    a, A = easy_witness(params)
    zh, zR = max_zhat_easy(params)
    w = check_col1(params, zhat, a, A)
    return ConvergenceWitness(Criterion.EASY, {"a": a, "A": A}, zhat <= zh and w.satisfied, zh, zR, w.detail)


def check_hs(params: MixtureParams, zhat: float, a: float, b: float, c: float,
             strict: bool = False) -> ConvergenceWitness:
    """Colloid conditions; ``strict`` gives the infinite-volume form."""
    v2R, vc, _ = _volumes(params)
    v2r = ball_volume(2 * params.r, params.d)
    zr, zh = abs(params.z_r), abs(zhat)
    e_bc = math.exp(b + c)
    lhs0 = v2r * zr * e_bc
    lhs1 = vc * zr * e_bc + math.exp(a) * v2R * zh
    lhs2 = math.exp(a) * vc * zh
    if strict:
        ok = lhs0 <= c and lhs1 < a and lhs2 < b
    else:
        ok = lhs0 <= c and lhs1 <= a and lhs2 <= b
    return ConvergenceWitness(Criterion.HS if strict else Criterion.HSPER, {"a": a, "b": b, "c": c}, ok, zhat,
                              detail={"lhs0": lhs0, "lhs1": lhs1, "lhs2": lhs2})


B_GRID = np.logspace(-2, 0, 20)
ALPHA_FACTORS = (1.01, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0)
A_GRID = np.logspace(-4, 1, 60)


def smallest_c(q: float) -> float | None:
    """Smallest c > 0 with c e^{-c} >= q (None if q > 1/e)."""
    if q <= 0:
        return 0.0
    if q > 1 / math.e:
        return None
    return float(-special.lambertw(-q, 0).real)


def default_construction(params: MixtureParams) -> tuple[float, float, float] | None:
    """(b, c, alpha): the largest grid b no bigger than 0.1 that is feasible, its smallest c, alpha = 2 e^(b+c)."""
    q0 = ball_volume(2 * params.r, params.d) * abs(params.z_r)
    feasible = [b for b in B_GRID if q0 * math.exp(b) <= 1 / math.e]
    if not feasible:
        return None
    small = [b for b in feasible if b <= 0.1]
    b = float(small[-1] if small else feasible[0])
    c = smallest_c(q0 * math.exp(b))
    return b, c, 2.0 * math.exp(b + c)


def hs_zhat_bound(params: MixtureParams, b: float, c: float, alpha: float) -> float:
    """Supremum of zhat for which a = alpha |corona| z_r satisfies the strict colloid conditions.

    Equivalent to e^a zhat < min((alpha - e^{b+c}) |corona| z_r / |B(0,2R)|, b / |corona|).
    """
    v2R, vc, _ = _volumes(params)
    zr = abs(params.z_r)
    a = alpha * vc * zr
    return math.exp(-a) * min((alpha - math.exp(b + c)) * vc * zr / v2R, b / vc)


def witness_search_hs(params: MixtureParams, zhat: float) -> ConvergenceWitness:
    """Search (b, c, alpha) grids for constants satisfying the strict colloid conditions."""
    v2r = ball_volume(2 * params.r, params.d)
    q0 = v2r * abs(params.z_r)
    if q0 >= 1 / math.e:
        raise PreconditionError(f"|B(0,2r)| z_r = {q0:.4g} >= 1/e: no witness can exist")
    zh = abs(zhat)
    best = 0.0
    for b in B_GRID:
        c = smallest_c(q0 * math.exp(b))
        if c is None:
            break
        if params.z_r == 0:
            for a in A_GRID:
                w = check_hs(params, zh, float(a), float(b), max(c, 1e-3), strict=True)
                if w.satisfied:
                    return _found(w, params, zh)
            continue
        for f in ALPHA_FACTORS:
            alpha = f * math.exp(b + c)
            best = max(best, hs_zhat_bound(params, b, c, alpha))
            a = alpha * corona_volume(params.R, params.r, params.d) * abs(params.z_r)
            w = check_hs(params, zh, a, float(b), c, strict=True)
            if w.satisfied:
                w.constants["alpha"] = alpha
                return _found(w, params, zh)
    return ConvergenceWitness(Criterion.SUFF_HS, {}, False, best or None, detail={"zhat": zh})


def _found(w: ConvergenceWitness, params: MixtureParams, zhat: float) -> ConvergenceWitness:
    cst = dict(w.constants)
    bound = None
    if "alpha" in cst:
        bound = hs_zhat_bound(params, cst["b"], cst["c"], cst["alpha"])
        cst["kappa"] = bound * params.R ** max(1, params.d - 1) * math.exp(cst["alpha"] * corona_volume(params.R, params.r, params.d) * abs(params.z_r))
    return ConvergenceWitness(Criterion.SUFF_HS, cst, True, bound, detail={**w.detail, "zhat": zhat})


def abstract_condition_sides(params: MixtureParams, zhat: float, a: float, A: float) -> tuple[float, float]:
    """Left-hand sides of the abstract conditions with a(x) = A on large spheres and b(y) = a on clouds.

    Integrals of |zeta_tilde| and |f| are done by radial quadrature of the
    indicator functions, independently of the closed-form volumes.
    """
    R, r = params.R, params.r

    def radial(lo, hi):
        val, _ = integrate.quad(lambda s: 4 * math.pi * s * s, lo, hi)
        return val
    corona = radial(R - r, R + r)
    core = radial(0.0, 2 * R)
    lhs1 = corona * math.exp(a) * params.z_r + core * math.exp(A) * zhat
    lhs2 = corona * math.exp(A) * zhat
    return lhs1, lhs2


def pair_criterion_bound(params: MixtureParams, kissing: int = 12) -> dict:
    """Non-rigorous pair-potential bound for the penetrable model.

    Uses the effective pair interaction only, with stability constant
    kissing/2 * z_r * |lens at contact|. Meaningful only when the multi-body
    terms vanish, i.e. r/R below 2/sqrt(3) - 1.
    """
    R, r, zr = params.R, params.r, params.z_r
    rho = R + r
    tail, _ = integrate.quad(lambda s: math.expm1(zr * lens_volume(rho, s)) * 4 * math.pi * s * s, 2 * R, 2 * rho)
    mass = ball_volume(2 * R, params.d) + tail
    stab = 0.5 * kissing * zr * lens_volume(rho, 2 * R)
    zh = math.exp(-1.0 - 2 * stab) / mass
    rigorous = r / R < 2 / math.sqrt(3) - 1
    return {"zhat": zh, "zR": zh * math.exp(zr * ball_volume(rho, params.d)), "rigorous": False,
            "multi_body_vanish": rigorous}


SWEEP_HEADER = ("zr", "R", "r", "zhat_easy", "zR_easy", "zR_kp", "ratio")


def region_sweep(zr_values, R_values=(1.0,), r_values=(0.1,), criteria=("easy", "kp")) -> list[dict]:
    """Tabulate admissible activities on a (z_r, R, r) grid."""
    rows = []
    for R in R_values:
        for r in r_values:
            for zr in zr_values:
                p = MixtureParams(float(R), float(r), 0.0, float(zr))
                zh, zR = max_zhat_easy(p)
                kp = max_zR_kp(p)
                row = {"zr": float(zr), "R": float(R), "r": float(r), "zhat_easy": zh, "zR_easy": zR,
                       "zR_kp": kp, "ratio": zR / kp}
                if "pair" in criteria:
                    pc = pair_criterion_bound(p)
                    row["zhat_pair"] = pc["zhat"]
                    row["zR_pair"] = pc["zR"]
                rows.append(row)
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    cols = list(SWEEP_HEADER) + [k for k in rows[0] if k not in SWEEP_HEADER] if rows else list(SWEEP_HEADER)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
