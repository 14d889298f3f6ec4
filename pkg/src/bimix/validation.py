"""The acceptance battery: twelve checks, each returning a machine-readable record."""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import clouds, convergence, expansion, graphs, interactions, oracle
from .effective import PenetrableW, zhat
from .estimates import MCEstimate, rng_for
from .geometry import BallSpec, BoxSpec, grid_intersection_volume, k_intersection_volume, lens_volume
from .interactions import Cloud, Configuration, MixtureParams

# closed forms at R = 1, r = 0.1, z_r = 0.1, recomputed at 30 digits
FROZEN = {
    "zhat_easy": 0.008364771173165897,
    "zR_easy": 0.014607819317672625,
    "zR_kp": 0.006286307168926241,
    "ratio": 2.323752073376296,
}
B2_HARD = -16.755160819145562


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self, timings: bool = False) -> dict:
        out = {"id": self.id, "name": self.name, "passed": bool(self.passed), "detail": self.detail}
        if timings:
            out["seconds"] = self.seconds
        return out


def check_geometry(seed: int = 0) -> tuple[bool, dict]:
    rng = rng_for(seed, 1)
    worst = 0.0
    for _ in range(20):
        R = rng.uniform(0.5, 5.0)
        r = rng.uniform(0.01, 0.99) * R
        ref = 2 * math.pi / 3 * r * r * (3 * R + 2 * r)
        worst = max(worst, abs(lens_volume(R + r, 2 * R) - ref) / ref)
    zscores = []
    for t in range(10):
        rho = rng.uniform(1.0, 1.3)
        # random triangle of side ~ rho so the three balls share a sizable region
        pts = rng.uniform(-0.6, 0.6, size=(3, 3)) * rho
        balls = [BallSpec(p, rho) for p in pts]
        mc = k_intersection_volume(balls, 200_000, seed=seed * 100 + t)
        grid = grid_intersection_volume(balls, h=0.005)
        zscores.append(abs(mc.value - grid) / max(mc.stderr, 1e-15))
    ok = worst <= 1e-12 and max(zscores) <= 3.0
    return ok, {"lens_max_rel_err": worst, "triple_max_z": max(zscores)}


def check_partition() -> tuple[bool, dict]:
    out = {n: graphs.partition_check(n) for n in (3, 4, 5)}
    ok = all(r["passed"] for r in out.values()) and [out[n]["connected"] for n in (3, 4, 5)] == [4, 38, 728]
    return ok, {str(n): {"sum_2_pow_eprime": r["sum_2_pow_eprime"], "connected": r["connected"],
                         "misplaced": r["misplaced"]} for n, r in out.items()}


def check_crucial_star() -> tuple[bool, dict]:
    res = graphs.crucial_star_check(6)
    return res["passed"], {"checked": res["checked"], "violations": len(res["violations"])}


def _near_contact_large(rng, m: int, params: MixtureParams) -> np.ndarray:
    """Large centers grown as a random tree with gaps in [2R, 2R + 2r], so neighbors share depletion lenses."""
    xs = [np.zeros(params.d)]
    while len(xs) < m:
        base = xs[rng.integers(len(xs))]
        u = rng.standard_normal(params.d)
        u /= np.linalg.norm(u)
        cand = base + u * rng.uniform(2 * params.R, 2 * params.excl)
        # occasionally allow an overlap so f-edges appear too
        if rng.random() < 0.2 or all(np.linalg.norm(cand - x) >= 2 * params.R for x in xs):
            xs.append(cand)
    return np.array(xs)


def _lens_point(rng, xs: np.ndarray, params: MixtureParams) -> np.ndarray:
    """Uniform point in the exclusion lens of a random pair of centers (or one exclusion ball)."""
    rho = params.excl
    i, j = rng.choice(len(xs), size=2, replace=False) if len(xs) > 1 else (0, 0)
    a, b = xs[i], xs[j]
    s = np.linalg.norm(a - b)
    if s >= 2 * rho or rng.random() < 0.25:
        b, s = a, 0.0
    mid, rad = 0.5 * (a + b), math.sqrt(max(rho * rho - s * s / 4, 0.0))
    while True:
        u = rng.standard_normal(params.d)
        p = mid + u / np.linalg.norm(u) * rad * rng.random() ** (1 / params.d)
        if np.linalg.norm(p - a) < rho and np.linalg.norm(p - b) < rho:
            return p


def _active_cloud(rng, xs, params: MixtureParams, k: int) -> Cloud:
    pts = [_lens_point(rng, xs, params)]
    for _ in range(1, k):
        v = rng.standard_normal(params.d)
        pts.append(pts[rng.integers(len(pts))] + v / np.linalg.norm(v) * rng.uniform(0, 2 * params.r))
    return Cloud(tuple(map(tuple, pts)))


def check_tree_graph(n: int = 1000, seed: int = 0) -> tuple[bool, dict]:
    params = MixtureParams(1.0, 0.1, 0.0, 0.1)
    rng = rng_for(seed, 4)
    counts = {}
    for m, r in ((2, 1), (3, 1), (2, 2), (3, 2)):
        bad = nonzero = 0
        for _ in range(n):
            xs = _near_contact_large(rng, m, params)
            cfg = Configuration(tuple(map(tuple, xs)), tuple(_active_cloud(rng, xs, params, 1) for _ in range(r)))
            lhs = abs(interactions.phi_star_T(cfg, params))
            rhs = interactions.tree_majorant(cfg, params)
            nonzero += lhs > 0
            bad += lhs > rhs + 1e-12
        counts[f"{m},{r}"] = {"violations": bad, "nonzero": nonzero}
    ok = all(c["violations"] == 0 and c["nonzero"] > 0 for c in counts.values())
    return ok, counts


def check_tildezeta(n: int = 1000, seed: int = 0) -> tuple[bool, dict]:
    rng = rng_for(seed, 5)
    out = {}
    L = 8.0
    for model in ("penetrable", "colloid"):
        for boundary in ("free", "periodic"):
            box = BoxSpec(L, boundary) if boundary == "periodic" else None
            params = MixtureParams(1.0, 0.2, 0.0, 0.1, model=model, box=box)
            bad = active = checked = 0
            while checked < n:
                xs = _near_contact_large(rng, int(rng.integers(2, 5)), params)
                size = 1 if model == "penetrable" else int(rng.integers(1, 5))
                Y = _active_cloud(rng, xs, params, size)
                if box is not None:
                    shift = rng.uniform(0, L, size=params.d)
                    xs = (xs + shift) % L
                    Y = Cloud(tuple(map(tuple, (Y.array + shift) % L)))
                if model == "colloid" and not Y.is_overlap_connected(params.r):
                    continue
                checked += 1
                l1, r1, l2, r2 = interactions.tildezeta_sides(xs, Y, params)
                active += (l1 > 0) + (l2 > 0)
                bad += (l1 > r1) + (l2 > r2)
            out[f"{model}/{boundary}"] = {"violations": bad, "active": active, "configs": checked}
    ok = all(v["violations"] == 0 and v["active"] > 0 for v in out.values())
    return ok, out


def check_psi_modes(seed: int = 0, samples: int = 100_000) -> tuple[bool, dict]:
    params = MixtureParams(1.0, 0.1, 0.003, 0.1)
    cases = {
        "m2_contact": [[0, 0, 0], [2.0, 0, 0]],
        "m2_gap": [[0, 0, 0], [2.12, 0, 0]],
        "m3_chain": [[0, 0, 0], [2.05, 0, 0], [4.1, 0.1, 0]],
        "m3_triangle": [[0, 0, 0], [2.05, 0, 0], [1.0, 1.9, 0]],
    }
    prov = PenetrableW(params)
    out, ok = {}, True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", clouds.TruncationWarning)
        for name, xs in cases.items():
            xs = np.array(xs, dtype=float)
            exact_val = interactions.psi_T(xs, params, prov, mode="hypergraph")
            mc = interactions.psi_T(xs, params, mode="cloud_series", truncation=3, samples=samples, seed=seed)
            good = mc.agrees_with(exact_val, 3.0)
            ok &= good
            out[name] = {"hypergraph": exact_val, "cloud_series": mc.value, "stderr": mc.stderr, "pass": good}
    return ok, out


def check_b2(seed: int = 0, samples: int = 200_000) -> tuple[bool, dict]:
    rng = rng_for(seed, 7)
    hard = expansion.b2_quadrature(MixtureParams(1.0, 0.1, 0.0, 0.0))
    rows, ok = [], abs(hard - B2_HARD) <= 1e-9
    for t in range(10):
        R = rng.uniform(0.8, 1.5)
        r = rng.uniform(0.05, 0.3) * R
        zr = rng.uniform(0.0, 0.5)
        p = MixtureParams(R, r, 0.0, zr)
        q = expansion.b2_quadrature(p)
        mc = expansion.b_m(2, p, samples, seed=seed * 100 + t)
        z = abs(mc.estimate - q) / mc.stderr
        ok &= z <= 3.0
        rows.append({"R": R, "r": r, "zr": zr, "quadrature": q, "mc": mc.estimate, "stderr": mc.stderr, "z": z})
    return ok, {"b2_hard": hard, "tuples": rows}


DESK = {"L": 6.0, "R": 1.0, "r": 0.1, "zr": 0.05, "zR": 0.003}


def check_desk(seed: int = 42, samples: int = 100_000, L=None, zr=None, zR=None,
               N1_max: int = 6, N2_max: int = 40, force: bool = False, workers: int = 1) -> tuple[bool, dict]:
    L = DESK["L"] if L is None else L
    zr = DESK["zr"] if zr is None else zr
    zR = DESK["zR"] if zR is None else zR
    box = BoxSpec(L)
    params = MixtureParams(DESK["R"], DESK["r"], zR, zr, box=box)
    cfg = oracle.OracleConfig(box, N1_max, N2_max, samples, seed, workers)
    res = oracle.run_oracle(params, cfg)
    V = box.volume
    cs = expansion.coefficients(params, 4, seed=seed)
    dcs = expansion.coefficients(params, 4, seed=seed, derivative=True)
    detail, ok = {"criterion_satisfied": True}, True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for M in (3, 4):
            pr = expansion.pressure_series(params, M, coeffs=cs[:M], force=True)
            rR = expansion.rho_R(params, M, coeffs=cs[:M], force=True)
            rr = expansion.rho_r(params, M, coeffs=cs[:M], dcoeffs=dcs[:M], force=True)
            detail["criterion_satisfied"] = pr.criterion_satisfied
            pairs = {
                "pressure": (MCEstimate(res.log_xi.value / V, res.log_xi.stderr / V, 0), pr),
                "rho_R": (res.rho_R, rR),
                "rho_r": (res.rho_r, rr),
            }
            for key, (orc, ser) in pairs.items():
                sig = math.hypot(orc.stderr, ser.total_stderr)
                z = (orc.value - ser.total) / sig
                ok &= abs(z) <= 3.0
                detail[f"{key}_M{M}"] = {"oracle": orc.value, "oracle_stderr": orc.stderr,
                                         "series": ser.total, "series_stderr": ser.total_stderr, "z": z}
    ideal = res.rho_r.value * V, zr * res.V_free_mean.value
    sig = math.hypot(res.rho_r.stderr * V, zr * res.V_free_mean.stderr)
    z_ideal = (ideal[0] - ideal[1]) / sig
    z_vf = (res.V_free_mean.value - res.V_free_hit.value) / math.hypot(res.V_free_mean.stderr, res.V_free_hit.stderr)
    ok &= abs(z_ideal) <= 3.0 and abs(z_vf) <= 3.0
    detail["free_volume_identity"] = {"rho_r_V": ideal[0], "zr_Vfree": ideal[1], "z": z_ideal}
    detail["free_volume_paths"] = {"inclusion_exclusion": res.V_free_mean.value, "hit_test": res.V_free_hit.value, "z": z_vf}
    detail["oracle_tail"] = res.tail
    if not detail["criterion_satisfied"] and not force:
        ok = False
    return ok, detail


def check_region() -> tuple[bool, dict]:
    p = MixtureParams(1.0, 0.1, 0.0, 0.1)
    zh, zR = convergence.max_zhat_easy(p)
    kp = convergence.max_zR_kp(p)
    got = {"zhat_easy": zh, "zR_easy": zR, "zR_kp": kp, "ratio": zR / kp}
    rel = {k: abs(got[k] - FROZEN[k]) / FROZEN[k] for k in FROZEN}
    simplified = convergence.improvement_ratio(p)
    rows = convergence.region_sweep(np.linspace(0.0, 0.2, 41))
    ratios = [row["ratio"] for row in rows]
    mono = all(b >= a - 1e-15 for a, b in zip(ratios, ratios[1:]))
    ok = (max(rel.values()) <= 1e-6 and abs(simplified - got["ratio"]) / got["ratio"] <= 1e-10
          and min(ratios) >= 1.0 and mono)
    return ok, {"values": got, "rel_err": rel, "simplified_ratio": simplified,
                "sweep_min_ratio": min(ratios), "sweep_monotone": mono}


def random_kp_witness(rng, params: MixtureParams):
    """Random (a, A, z_R) satisfying the volume-scaling conditions."""
    v2R, _, vex = convergence._volumes(params)
    a = rng.uniform(0.01, 3.0)
    floor = vex * math.exp(a) * params.z_r
    A = floor + rng.uniform(0.01, 3.0)
    zmax = min((A - floor) / (v2R * math.exp(A)), a / (vex * math.exp(A)))
    return a, A, rng.uniform(0.0, 1.0) * zmax


def check_kp(n: int = 100, seed: int = 0) -> tuple[bool, dict]:
    rng = rng_for(seed, 10)
    bad = 0
    for _ in range(n):
        R = rng.uniform(0.5, 2.0)
        p = MixtureParams(R, rng.uniform(0.02, 0.5) * R, 0.0, rng.uniform(0.0, 0.3))
        a, A, zR = random_kp_witness(rng, p)
        assert convergence.check_kp_u1u2(p, a, A, zR).satisfied
        bad += zR > convergence.max_zR_kp(p) * (1 + 1e-12)
    return bad == 0, {"witnesses": n, "violations": bad}


def colloid_points(seed: int = 0, n: int = 10):
    """(params, zhat) pairs inside and outside the colloid precondition."""
    rng = rng_for(seed, 11)
    good, bad = [], []
    from .geometry import ball_volume
    for _ in range(n):
        r = rng.uniform(0.05, 0.2)
        R = rng.uniform(1.0, 3.0)
        # keep a = alpha |corona| z_r of order one so the bound is representable
        p = MixtureParams(R, r, 0.0, 1.0, model="colloid")
        zr_max = min(0.95 / (math.e * ball_volume(2 * r)), 1.0 / convergence._volumes(p)[1])
        p = p.with_(z_r=rng.uniform(0.05, 1.0) * zr_max)
        b, c, alpha = convergence.default_construction(p)
        bound = convergence.hs_zhat_bound(p, b, c, alpha)
        good.append((p, 0.5 * bound))
        q_bad = rng.uniform(1.0, 3.0) / math.e
        bad.append((p.with_(z_r=q_bad / ball_volume(2 * r)), 1e-4))
    return good, bad


def check_colloid_witness(seed: int = 0) -> tuple[bool, dict]:
    good, bad = colloid_points(seed)
    found = precondition = 0
    for p, zh in good:
        w = convergence.witness_search_hs(p, zh)
        if w.satisfied:
            c = w.constants
            found += convergence.check_hs(p, zh, c["a"], c["b"], c["c"], strict=True).satisfied
    for p, zh in bad:
        try:
            convergence.witness_search_hs(p, zh)
        except convergence.PreconditionError:
            precondition += 1
    return found == len(good) and precondition == len(bad), {
        "found_and_reverified": found, "of": len(good), "precondition_reported": precondition, "of_bad": len(bad)}


def check_derivative(seed: int = 0, samples: int = 200_000, h: float = 1e-3) -> tuple[bool, dict]:
    rng = rng_for(seed, 12)
    rows, ok = [], True
    for t in range(5):
        R = rng.uniform(0.8, 1.3)
        p = MixtureParams(R, rng.uniform(0.05, 0.3) * R, 0.0, rng.uniform(0.01, 0.4))
        rooted = expansion.db_m_dzr(2, p, samples, seed=seed * 10 + t, method="hypergraph")
        fd = expansion.b_m_finite_difference(2, p, h, samples, seed=seed * 10 + t + 5)
        quad = expansion.db2_quadrature(p)
        # O(h^2) allowance from the third derivative, bounded by the quadrature's own scale
        slack = h * h * abs(quad) * p.excluded_volume ** 2
        sig = math.hypot(rooted.stderr, fd.stderr)
        good = abs(rooted.estimate - fd.value) <= 3 * sig + slack
        ok &= good
        rows.append({"rooted": rooted.estimate, "rooted_stderr": rooted.stderr, "finite_difference": fd.value,
                     "fd_stderr": fd.stderr, "quadrature": quad, "pass": bool(good)})
    return ok, {"tuples": rows}


CHECKS = [
    (1, "geometry exactness", check_geometry),
    (2, "partition scheme completeness", check_partition),
    (3, "crucial-star implications", check_crucial_star),
    (4, "tree-graph inequality", check_tree_graph),
    (5, "corona surrogate inequalities", check_tildezeta),
    (6, "psi_T hypergraph vs cloud series", check_psi_modes),
    (7, "b_2 vs radial quadrature", check_b2),
    (8, "expansion vs brute-force oracle", check_desk),
    (9, "convergence-region improvement", check_region),
    (10, "volume-scaling necessity", check_kp),
    (11, "colloid witness pipeline", check_colloid_witness),
    (12, "derivative vs finite differences", check_derivative),
]


def run_check(cid: int, **kw) -> CheckResult:
    for i, name, fn in CHECKS:
        if i == cid:
            t = time.perf_counter()
            try:
                ok, detail = fn(**kw)
            except Exception as exc:  # a crash is a failed check, not a crashed battery
                ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
            return CheckResult(i, name, bool(ok), _plain(detail), time.perf_counter() - t)
    raise KeyError(cid)


def validate_all(config: dict | None = None, only=None) -> list[CheckResult]:
    """Run the acceptance battery; ``config`` may override desk-case values (L, zr, zR, seed, samples)."""
    config = dict(config or {})
    out = []
    for cid, _, _ in CHECKS:
        if only and cid not in only:
            continue
        kw = {}
        if cid == 8:
            for key in ("L", "zr", "zR", "seed", "samples"):
                if key in config:
                    kw[key] = config[key]
        out.append(run_check(cid, **kw))
    return out


def _plain(obj):
    """Convert numpy scalars and containers into JSON-friendly Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
