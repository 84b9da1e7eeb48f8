"""Relation registry, verification runner, and growth sweeps.

The registry encodes the inequalities tying measures together, each with the
defining statement it checks, a severity (assert / report / doc), and an
evaluator over a computed measure map.  verify_all computes every measure
applicable to a matrix under the given caps and evaluates every relation
whose inputs are present, recording numeric margins so near-violations stay
visible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import exactcomb as xc
from . import facnorm as fn
from . import lpbounds as lb
from .matrices import BOOL, CommMatrix, Distribution, distinct_row_count, one_way_cc

ASSERT = "assert"
REPORT = "report"
DOC = "doc"

KIND_EXACT = "exact"
KIND_BRACKET = "bracket"
KIND_HEURISTIC = "heuristic-bound"

SOLVER_SLACK = 1e-5  # scaled slack for solver-backed comparisons
LP_SLACK = 1e-6


@dataclass
class MeasureValue:
    id: str
    value: float | int | None
    kind: str
    provenance: str
    extra: dict = field(default_factory=dict)


@dataclass
class RelationRecord:
    id: str
    statement: str
    severity: str
    needs: tuple
    evaluate: object = None  # (measures, eps) -> (holds, margin)
    note: str = ""


@dataclass
class RelationOutcome:
    id: str
    severity: str
    outcome: str  # "holds" | "violated" | "skipped"
    margin: float | None = None
    reason: str = ""


@dataclass
class VerificationReport:
    label: str
    measures: list
    relations: list

    @property
    def violations(self):
        return [r for r in self.relations if r.outcome == "violated" and r.severity == ASSERT]

    def to_json_dict(self):
        return {
            "matrix": self.label,
            "measures": [
                {
                    "id": m.id,
                    "value": None if m.value is None else float(m.value),
                    "kind": m.kind,
                }
                for m in self.measures
            ],
            "relations": [
                {
                    "id": r.id,
                    "outcome": r.outcome,
                    "margin": None if r.margin is None else float(r.margin),
                }
                for r in self.relations
            ],
        }


REPORT_JSON_SCHEMA = {
    "type": "object",
    "required": ["matrix", "measures", "relations"],
    "properties": {
        "matrix": {"type": "string"},
        "measures": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "value", "kind"],
                "properties": {
                    "id": {"type": "string"},
                    "value": {"type": ["number", "null"]},
                    "kind": {"type": "string"},
                },
            },
        },
        "relations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "outcome", "margin"],
                "properties": {
                    "id": {"type": "string"},
                    "outcome": {"type": "string"},
                    "margin": {"type": ["number", "null"]},
                },
            },
        },
    },
}


# ---------------------------------------------------------------------------
# Measure computation
# ---------------------------------------------------------------------------


@dataclass
class VerifyCaps:
    tree_cells: int = 8  # max side for protocol-tree search
    partition_cells: int = 6
    cover_cells: int = 8
    gamma2_order: int = 160
    vc_cap: int = 6
    sq_cap: int = 8
    include_heuristic: bool = True  # heuristic-kind extras (product disc)
    budget: xc.SearchBudget = field(default_factory=xc.SearchBudget)


def compute_measures(m: CommMatrix, caps: VerifyCaps, eps):
    """All applicable measures; skipped ones are recorded with value None."""
    out = {}
    skipped = {}

    def put(mid, fn_, kind, prov, **extra):
        try:
            val = fn_()
        except (xc.BudgetExceededError, ValueError, lb.BoundSolveError, fn.Gamma2Error) as e:
            skipped[mid] = str(e)
            return None
        out[mid] = MeasureValue(mid, val, kind, prov, extra)
        return val

    mb = m.to_bool()
    ms = m.to_sign()
    r, c = m.rows, m.cols

    put("distinct_rows", lambda: distinct_row_count(mb), KIND_EXACT, "row dedup")
    put("one_way", lambda: one_way_cc(mb), KIND_EXACT, "ceil log2 distinct rows")
    put("rank", lambda: xc.rank_exact(mb), KIND_EXACT, "fraction-free elimination")
    put("rank_sign", lambda: xc.rank_exact(ms), KIND_EXACT, "fraction-free elimination")

    if max(r, c) <= caps.tree_cells:
        put("D", lambda: xc.deterministic_cc(mb, caps.budget), KIND_EXACT, "protocol-tree search")
        put("CP", lambda: xc.protocol_partition_number(mb, caps.budget), KIND_EXACT, "protocol-tree search")
    else:
        skipped["D"] = f"side beyond tree cap {caps.tree_cells}"
    if max(r, c) <= caps.cover_cells:
        c0 = put("C0", lambda: xc.cover_number(mb, 0, caps.budget), KIND_EXACT, "set cover")
        c1 = put("C1", lambda: xc.cover_number(mb, 1, caps.budget), KIND_EXACT, "set cover")
        put("C", lambda: xc.cover_total(mb, caps.budget), KIND_EXACT, "mixed set cover")
        if c0:
            put("N0", lambda: math.log2(c0), KIND_EXACT, "log2 C0")
        if c1:
            put("N1", lambda: math.log2(c1), KIND_EXACT, "log2 C1")
            put("boolrank", lambda: c1, KIND_EXACT, "positivity pattern = C1")
    if max(r, c) <= caps.partition_cells:
        put("CD", lambda: xc.partition_number(mb, caps.budget), KIND_EXACT, "partition search")
        put(
            "rank_plus_upper",
            lambda: xc.ones_partition_number(mb, caps.budget),
            KIND_EXACT,
            "ones-partition search",
        )
    put("vc", lambda: xc.vc_dimension(mb, caps.vc_cap)[0], KIND_EXACT, "column-subset shattering")
    if r <= 64:
        put("sq_uniform", lambda: xc.sq_dimension_uniform(ms, caps.sq_cap), KIND_EXACT, "clique search")
    if distinct_row_count(ms) <= xc.SIGNRANK_ROW_CAP:
        put(
            "signrank_le2",
            lambda: int(xc.signrank_le_2(ms, caps.budget)[0]),
            KIND_EXACT,
            "circular orders + gap LP",
        )

    if r + c <= caps.gamma2_order:
        try:
            res = fn.gamma2(mb)
            out["gamma2"] = MeasureValue(
                "gamma2",
                res.value,
                KIND_BRACKET,
                "splitting SDP + certificates",
                {"lower": res.certificate.lower_value, "upper": res.certificate.upper_value},
            )
        except fn.Gamma2Error as e:
            skipped["gamma2"] = str(e)
        put("gamma2_sign", lambda: fn.gamma2(ms).value, KIND_BRACKET, "splitting SDP")
        put("gamma2_alpha3", lambda: fn.gamma2_alpha(ms, 3.0).value, KIND_BRACKET, "splitting SDP")
        put("gamma2_inf", lambda: fn.gamma2_inf(ms).value, KIND_BRACKET, "splitting SDP")

    uniform = Distribution.uniform(r, c)
    exact_oracle = min(r, c) <= 16
    lp_kind = KIND_EXACT if exact_oracle else KIND_HEURISTIC

    def bound_put(mid, fn_):
        def wrapped():
            res = fn_()
            return res.value

        put(mid, wrapped, lp_kind if exact_oracle else KIND_HEURISTIC, "rectangle LP")

    bound_put("disc", lambda: lb.discrepancy(mb))
    bound_put("disc_uniform", lambda: lb.discrepancy_under(mb, uniform))
    bound_put("wreg_uniform", lambda: lb.weak_regularity(mb, uniform))
    if exact_oracle:
        bound_put("rec0", lambda: lb.rectangle_bound_lp(mb, 0, eps))
        bound_put("rec1", lambda: lb.rectangle_bound_lp(mb, 1, eps))
        bound_put("srec0", lambda: lb.smooth_rectangle_bound_lp(mb, 0, eps))
        bound_put("srec1", lambda: lb.smooth_rectangle_bound_lp(mb, 1, eps))
        bound_put("prt", lambda: lb.partition_bound(mb, eps))
        bound_put("rprt_uniform", lambda: lb.relaxed_partition_bound(mb, uniform, eps))
        bound_put("prt_fixed_uniform", lambda: lb.fontes_family(mb, uniform, eps, lb.FIXED_PRT))
        bound_put("prt_pos_uniform", lambda: lb.fontes_family(mb, uniform, eps, lb.POSITIVE_PRT))
        bound_put("wprt_uniform", lambda: lb.fontes_family(mb, uniform, eps, lb.WEAK_PRT))
    if caps.include_heuristic:
        put(
            "proddisc_upper",
            lambda: lb.product_discrepancy_upper(mb, restarts=2, sweeps=2).value,
            KIND_HEURISTIC,
            "alternating marginal LPs",
        )
    else:
        skipped["proddisc_upper"] = "heuristic extras disabled by caps"
    return out, skipped


# ---------------------------------------------------------------------------
# Relation registry
# ---------------------------------------------------------------------------


def _get(ms, *ids):
    vals = []
    for i in ids:
        mv = ms.get(i)
        if mv is None or mv.value is None:
            return None
        vals.append(mv.value)
    return vals


def _chain(*pairs):
    """Margin of a <=-chain: min over links of rhs - lhs."""
    return min(b - a for a, b in pairs)


def registry():
    recs = []

    def add(rid, statement, severity, needs, evaluate, note=""):
        recs.append(RelationRecord(rid, statement, severity, tuple(needs), evaluate, note))

    add(
        "cover_sum",
        "C(f) = C^0(f) + C^1(f)",
        ASSERT,
        ("C", "C0", "C1"),
        lambda v, eps: (abs(v[0] - v[1] - v[2]) == 0, -abs(v[0] - v[1] - v[2])),
    )
    add(
        "cover_partition_chain",
        "C(f) <= C^D(f) <= C^P(f) <= 2^{D(f)}",
        ASSERT,
        ("C", "CD", "CP", "D"),
        lambda v, eps: (lambda mg: (mg >= 0, mg))(_chain((v[0], v[1]), (v[1], v[2]), (v[2], 2.0 ** v[3]))),
    )
    add(
        "nz_log_cover",
        "N^z(f) = log C^z(f)",
        ASSERT,
        ("N1", "C1"),
        lambda v, eps: (abs(v[0] - math.log2(v[1])) < 1e-12, -abs(v[0] - math.log2(v[1]))),
    )
    add(
        "rank_one_way",
        "log rank(f) <= D^{A->B}(f) <= rank(f)",
        ASSERT,
        ("rank", "one_way"),
        lambda v, eps: (lambda mg: (mg >= 0, mg))(_chain((math.log2(v[0]), v[1]), (v[1], v[0]))),
    )
    add(
        "gamma2_chain",
        "gamma2^inf(M_f) <= gamma2^alpha(M_f) <= gamma2(M_f) <= sqrt(rank(M_f))",
        ASSERT,
        ("gamma2_inf", "gamma2_alpha3", "gamma2_sign", "rank_sign"),
        lambda v, eps: (lambda mg: (mg >= -SOLVER_SLACK * (1 + abs(v[2])), mg))(
            _chain((v[0], v[1]), (v[1], v[2]), (v[2], math.sqrt(v[3])))
        ),
    )
    add(
        "disc_gamma2_sandwich",
        "1/8 gamma2^inf(M_f) <= 1/disc(M_f) <= 8 gamma2^inf(M_f)",
        ASSERT,
        ("gamma2_inf", "disc"),
        lambda v, eps: (lambda mg: (mg >= -SOLVER_SLACK * (1 + 1 / max(v[1], 1e-9)), mg))(
            _chain((v[0] / 8.0, 1.0 / max(v[1], 1e-12)), (1.0 / max(v[1], 1e-12), 8.0 * v[0]))
        ),
    )
    add(
        "wreg_equals_disc",
        "wreg^mu(f) = disc^mu(f)",
        ASSERT,
        ("wreg_uniform", "disc_uniform"),
        lambda v, eps: (abs(v[0] - v[1]) <= 1e-9, -abs(v[0] - v[1])),
    )
    add(
        "fontes_chain",
        "wprt^mu_eps(f) <= prt^{+,mu}_eps(f) <= prt^mu_eps(f)",
        ASSERT,
        ("wprt_uniform", "prt_pos_uniform", "prt_fixed_uniform"),
        lambda v, eps: (lambda mg: (mg >= -LP_SLACK * (1 + abs(v[2])), mg))(
            _chain((v[0], v[1]), (v[1], v[2]))
        ),
    )
    add(
        "relaxed_chain",
        "wprt^mu_eps(f) <= rprt^mu_eps(f) <= prt^mu_eps(f)",
        ASSERT,
        ("wprt_uniform", "rprt_uniform", "prt_fixed_uniform"),
        lambda v, eps: (lambda mg: (mg >= -LP_SLACK * (1 + abs(v[2])), mg))(
            _chain((v[0], v[1]), (v[1], v[2]))
        ),
    )
    add(
        "wprt_vs_wreg",
        "wprt^mu_eps(f) >= (1 - eps |Z|/(|Z|-1)) / wreg^mu(f)",
        ASSERT,
        ("wprt_uniform", "wreg_uniform"),
        lambda v, eps: (
            (v[0] >= (1 - 2 * eps) / v[1] - LP_SLACK * (1 + abs(v[0])), v[0] - (1 - 2 * eps) / v[1])
            if v[1] > 1e-12
            else (True, float("inf"))
        ),
    )
    add(
        "log_prt_vs_D",
        "R^pub_eps(f) >= log prt_eps(f), composed with R^pub <= D",
        ASSERT,
        ("prt", "D"),
        lambda v, eps: (
            (math.log2(max(v[0], 1e-12)) <= v[1] + LP_SLACK, v[1] - math.log2(max(v[0], 1e-12)))
        ),
    )
    add(
        "lp_bound_chain0",
        "rec~^0_eps(f) <= srec~^0_eps(f) <= prt_eps(f)",
        ASSERT,
        ("rec0", "srec0", "prt"),
        lambda v, eps: (lambda mg: (mg >= -LP_SLACK * (1 + abs(v[2])), mg))(
            _chain((v[0], v[1]), (v[1], v[2]))
        ),
    )
    add(
        "lp_bound_chain1",
        "rec~^1_eps(f) <= srec~^1_eps(f) <= prt_eps(f)",
        ASSERT,
        ("rec1", "srec1", "prt"),
        lambda v, eps: (lambda mg: (mg >= -LP_SLACK * (1 + abs(v[2])), mg))(
            _chain((v[0], v[1]), (v[1], v[2]))
        ),
    )
    add(
        "signrank_plus_n1",
        "ceil(log signrank_+(f)) <= N^1(f) <= ceil(log signrank_+(f)) + 2",
        ASSERT,
        ("boolrank", "C1"),
        lambda v, eps: (lambda lo, mid: (lo <= mid <= lo + 2, (lo + 2) - mid))(
            math.ceil(math.log2(max(v[0], 1))), math.ceil(math.log2(max(v[1], 1)))
        ),
        note="N^1 read in integer bits; signrank_+ = C^1 by the positivity pattern",
    )
    add(
        "n1_vs_rank_plus",
        "N^1(f) <= log rank_+(f)",
        ASSERT,
        ("C1", "rank_plus_upper"),
        lambda v, eps: (v[0] <= v[1], math.log2(max(v[1], 1)) - math.log2(max(v[0], 1))),
    )
    add(
        "rank_vs_rank_plus",
        "rank_+(M) >= signrank_+(M); rank <= rank_+ <= ones-partition",
        ASSERT,
        ("rank", "rank_plus_upper"),
        lambda v, eps: (v[0] <= v[1], v[1] - v[0]),
    )
    add(
        "nz_vs_D",
        "ceil(log2 C^z(f)) <= D(f) for z in {0,1}",
        ASSERT,
        ("C0", "C1", "D"),
        lambda v, eps: (lambda mg: (mg >= 0, mg))(
            min(
                v[2] - math.ceil(math.log2(v[0])) if v[0] >= 1 else float("inf"),
                v[2] - math.ceil(math.log2(v[1])) if v[1] >= 1 else float("inf"),
            )
        ),
    )
    add(
        "dmu_vs_disc",
        "D^mu_{1/2-eps}(f) >= log(2 eps / disc_mu(f)) at eps' = 1/6",
        REPORT,
        ("disc_uniform", "D"),
        lambda v, eps: (
            (True, v[1] - math.log2(max(2 * (1 / 6) / max(v[0], 1e-12), 1e-12)))
        ),
    )
    add(
        "sq_vs_proddisc",
        "sqrt(sq(M)/2) < 1/disc^[](M) < 8 sq(M)^2",
        REPORT,
        ("sq_uniform", "proddisc_upper"),
        lambda v, eps: (
            (True, 1.0 / max(v[1], 1e-12) - math.sqrt(v[0] / 2.0))
        ),
        note="product-disc side is a heuristic upper bound; reported only",
    )
    add(
        "lovett_rank",
        "D(f) <= O(sqrt(rank) log rank): reported ratio",
        REPORT,
        ("D", "rank"),
        lambda v, eps: (
            (True, v[0] / (math.sqrt(v[1]) * max(math.log2(v[1]), 1.0)))
        ),
        note="asymptotic constant unspecified; margins logged, never asserted",
    )
    add(
        "rec_conventional_conversion",
        "rec~^z_eps(f) <= rec^z_{eps/2}(f)",
        REPORT,
        ("rec1",),
        lambda v, eps: (True, float("nan")),
        note="outer max over lambda only available as a candidate heuristic",
    )
    add(
        "recz_disc_scale",
        "rec^z_eps(f) >= (1/2 - eps) disc^lambda(f) - 1/2: both scale readings reported",
        REPORT,
        ("rec1", "disc_uniform"),
        lambda v, eps: (True, v[0] - ((0.5 - eps) / max(v[1], 1e-12) - 0.5)),
        note="count-vs-probability scale mismatch; inverse reading logged",
    )
    # documentation stubs: measures out of computational scope
    for rid, st in (
        ("doc_rpub_prt", "R^pub_eps(f) >= log prt_eps(f)"),
        ("doc_qstar_disc", "Q*_eps(f) >= Omega(log((1-2eps)/disc(f)))"),
        ("doc_ic_prt", "IC_eps(f) vs relaxed partition bound"),
        ("doc_gamma2_qstar", "gamma2(f) <= 2^{Q*_{=eps}(f)}"),
    ):
        add(rid, st, DOC, (), None, note="references a model outside the computed set")
    return recs


def evaluate_relations(measures, eps, records=None):
    out = []
    for rec in records or registry():
        if rec.severity == DOC or rec.evaluate is None:
            out.append(RelationOutcome(rec.id, rec.severity, "skipped", None, "documentation stub"))
            continue
        vals = _get(measures, *rec.needs)
        if vals is None:
            missing = [i for i in rec.needs if i not in measures]
            out.append(
                RelationOutcome(rec.id, rec.severity, "skipped", None, f"missing {missing}")
            )
            continue
        holds, margin = rec.evaluate(vals, eps)
        out.append(
            RelationOutcome(
                rec.id,
                rec.severity,
                "holds" if holds else "violated",
                margin,
            )
        )
    return out


def verify_all(m: CommMatrix, caps: VerifyCaps | None = None, eps=1.0 / 3.0) -> VerificationReport:
    caps = caps or VerifyCaps()
    measures, skipped = compute_measures(m, caps, eps)
    relations = evaluate_relations(measures, eps)
    mvs = list(measures.values())
    for mid, why in skipped.items():
        mvs.append(MeasureValue(mid, None, "skipped", why))
    return VerificationReport(label=m.label or "matrix", measures=mvs, relations=relations)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

SWEEP_FAMILIES = ("eq", "hd1", "gt", "sip3d", "pgint")


def _family_instance(family, n):
    from . import matrices as mm

    if family == "eq":
        return mm.gen_equality(n)
    if family == "hd1":
        return mm.gen_hamming_distance(n, 1)
    if family == "gt":
        return mm.gen_greater_than(n)
    if family == "sip3d":
        return mm.gen_sign_inner_product_3d(n)
    if family == "pgint":
        return mm.gen_projective_intervals(n)
    raise ValueError(f"unknown family {family!r}")


def _sweep_measure(m: CommMatrix, measure, eps, budget):
    from . import matrices as mm

    if measure == "gamma2":
        res = fn.gamma2(m.to_bool())
        return res.value, KIND_BRACKET
    if measure == "D":
        return xc.deterministic_cc(m.to_bool(), budget), KIND_EXACT
    if measure == "rank":
        return xc.rank_exact(m), KIND_EXACT
    if measure == "disc":
        res = lb.discrepancy(m.to_bool())
        return res.value, KIND_EXACT if res.kind == lb.EXACT else KIND_HEURISTIC
    if measure == "disc_uniform":
        res = lb.discrepancy_under(m.to_bool(), Distribution.uniform(m.rows, m.cols))
        return res.value, KIND_EXACT if res.kind == lb.EXACT else KIND_HEURISTIC
    if measure == "vc":
        return xc.vc_dimension(m)[0], KIND_EXACT
    if measure == "one_way":
        return one_way_cc(m.to_bool()), KIND_EXACT
    if measure == "prt":
        return lb.partition_bound(m.to_bool(), eps).value, KIND_EXACT
    if measure == "trace_lower":
        label = m.label or ""
        n = int(label.split(":")[1].split(",")[0]) if ":" in label else 0
        return float(mm.hypercube_trace_lower(n)), KIND_EXACT
    raise ValueError(f"unknown sweep measure {measure!r}")


def sweep(family, n_values, measure_ids, eps=1.0 / 3.0, budget=None, fit=False):
    """Per-n measure table; optional log-log least-squares exponent fit."""
    budget = budget or xc.SearchBudget()
    rows = []
    for n in n_values:
        m = _family_instance(family, n)
        for mid in measure_ids:
            val, kind = _sweep_measure(m, mid, eps, budget)
            rows.append({"family": family, "n": n, "measure": mid, "value": val, "kind": kind})
    fits = {}
    if fit:
        for mid in measure_ids:
            pts = [(r["n"], r["value"]) for r in rows if r["measure"] == mid and r["value"] > 0]
            if len(pts) >= 2:
                lx = np.log([p[0] for p in pts])
                ly = np.log([p[1] for p in pts])
                slope, intercept = np.polyfit(lx, ly, 1)
                resid = ly - (slope * lx + intercept)
                fits[mid] = {
                    "exponent": float(slope),
                    "coeff": float(np.exp(intercept)),
                    "rms_residual": float(np.sqrt((resid**2).mean())),
                }
    return rows, fits


def sweep_csv(rows):
    lines = ["family,n,measure,value,kind"]
    for r in rows:
        lines.append(f'{r["family"]},{r["n"]},{r["measure"]},{r["value"]},{r["kind"]}')
    return "\n".join(lines) + "\n"


def validate_report_json(doc):
    """Minimal schema validation; raises ValueError on mismatch."""
    def fail(msg):
        raise ValueError(f"report schema violation: {msg}")

    if not isinstance(doc, dict):
        fail("not an object")
    for key in ("matrix", "measures", "relations"):
        if key not in doc:
            fail(f"missing {key}")
    if not isinstance(doc["matrix"], str):
        fail("matrix must be a string")
    for mrec in doc["measures"]:
        if not isinstance(mrec.get("id"), str) or "value" not in mrec or "kind" not in mrec:
            fail("bad measure record")
        if mrec["value"] is not None and not isinstance(mrec["value"], (int, float)):
            fail("bad measure value")
    for rrec in doc["relations"]:
        if not isinstance(rrec.get("id"), str) or "outcome" not in rrec or "margin" not in rrec:
            fail("bad relation record")
    return True
