"""Synthetic questionnaire populations with plantable class structure.

The generator draws per-class indicator targets, realizes them as
component scores achievable under the scoring table (tri levels, count
fractions, continuous mappings), then inverts every component mapping
back to raw field values.  Class labels are therefore *derived* — every
generated questionnaire is valid and its SI category follows from real
scoring, never from a stored label.

Structure is plantable at two levels:

* ``class_mix`` fixes the share of each SI category (exact allocation,
  largest remainder);
* ``planted_rules`` are conjunctive indicator conditions implying a
  class; within the target class, exactly the requested fraction of
  records satisfies all conjuncts and every other record violates at
  least one of them (records of other classes always violate).  The
  generator keeps probability mass close to each threshold on both
  sides so that rule learners see crisp boundaries.

A configurable subset of indicators carries the class signal; the rest
are drawn from one shared distribution so they stay uninformative.  A
"coupled" indicator can be made to track another one plus noise, which
keeps it informative on its own but redundant next to its leader.

Every record is re-scored through the real scoring path after
construction; class membership and rule satisfaction are verified on the
re-scored values, so planted structure is exact by construction.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field

import numpy as np

from .errors import SynthesisError
from .indicators import (
    CATEGORIES,
    TRI_SCORES,
    ComponentSpec,
    compute_si,
    categorize,
    compute_indicator_vector,
    load_scoring_table,
)
from .qschema import Questionnaire, QuestionnaireHeader, load_field_registry

_TRI_TOKENS = {v: k for k, v in TRI_SCORES.items()}

_SI_WINDOWS = {"Low": (0.25, 0.4995), "Medium": (0.52, 0.6995), "High": (0.7005, 0.92)}
_NONSIGNAL_BETA = (16.0, 6.7)
_SIGNAL_BETA = {"Low": (1.6, 6.4), "Medium": (6.0, 4.0), "High": (7.8, 1.6)}
_WEAK_OFFSET = {"Low": -1.5, "Medium": -0.5, "High": 0.5}
# Unpinned signal indicators draw an independent per-attribute "niche"
# level; half the records of a class express the niche, the rest fall
# back to a class-independent middle band.  Independent draws keep the
# signal attributes individually class-correlated but only weakly
# inter-correlated.
_NICHE_BETA = {"Low": (2.0, 6.0), "Medium": (6.0, 8.3), "High": (14.0, 2.0)}
_NICHE_FALLBACK = (11.7, 6.3)
_NICHE_EXPRESS = {"Low": 0.42, "Medium": 0.42, "High": 0.46}

# Share of a rule's target class that stays outside every planted rule.
# Such records carry no single telltale level; they are uniformly elevated
# across the signal indicators instead, so only the joint profile gives
# their class away.
_UNCOVERED_SHARE = 0.12
_UNCOVERED_BETA = (14.0, 2.8)
_PIN_MARGIN = 1e-6

_MUNICIPALITIES = (
    ("Pará de Minas", "Pará River", "Central", "Divinópolis"),
    ("Divinópolis", "Pará River", "Central", "Divinópolis"),
    ("Bom Despacho", "Lagoa da Prata corridor", "Central", "Bom Despacho"),
    ("Luz", "Alto São Francisco River", "Central", "Bom Despacho"),
    ("Dores do Indaiá", "Indaiá River", "Central", "Bom Despacho"),
    ("Abaeté", "Abaeté and neighboring streams", "Central", "Três Marias"),
    ("Tiros", "Abaeté and neighboring streams", "Alto Paranaíba", "Patos de Minas"),
    ("Morada Nova de Minas", "Borrachudo River", "Central", "Três Marias"),
    ("Três Marias", "Alto São Francisco River", "Central", "Três Marias"),
    ("Felixlândia", "Alto São Francisco River", "Central", "Três Marias"),
    ("Curvelo", "Jequitaí and Pacuí Rivers", "Central", "Curvelo"),
    ("Pompéu", "Paraopeba River", "Central", "Curvelo"),
    ("Papagaios", "Paraopeba River", "Central", "Curvelo"),
    ("Buritizeiro", "Urucuia River", "Norte", "Pirapora"),
)

_INCOMES = ("Milk", "Coffee", "Beef cattle", "Grains", "Horticulture", "Mixed")

_ACTIVITIES = (
    ("Milk production", "liters/day"),
    ("Coffee", "bags/ha"),
    ("Maize", "t/ha"),
    ("Beans", "t/ha"),
    ("Beef cattle", "head/year"),
    ("Vegetables", "boxes/week"),
    ("Eucalyptus", "m3/ha"),
)

_PHRASES = (
    "erosão na estrada de acesso principal",
    "falta de cerca na área de preservação",
    "nascente desprotegida perto do curral",
    "armazenamento de embalagens precisa de melhoria",
    "pastagem degradada no fundo da propriedade",
    "estrada interna com buracos e atoleiros",
    "esgoto doméstico sem fossa séptica",
    "baixa diversificação das fontes de renda",
)

_PRODUCTS = ("Glifosato", "2,4-D", "Mancozebe", "Atrazina", "Clorpirifós")
_CROPS = ("milho", "café", "pastagem", "feijão", "horta")


@dataclass(frozen=True)
class PlantedRule:
    """Conjunction of indicator thresholds implying a class.

    ``conditions`` is a tuple of ``(indicator_id, threshold)`` pairs read
    as ``indicator >= threshold``; ``coverage`` is the fraction of
    target-class records that must satisfy every conjunct.
    """

    conditions: tuple[tuple[int, float], ...]
    target_class: str
    coverage: float


@dataclass
class SyntheticConfig:
    n: int
    seed: int
    class_mix: dict = field(default_factory=lambda: {"High": 0.45, "Medium": 0.55})
    planted_rules: tuple[PlantedRule, ...] = ()
    signal_indicators: tuple[int, ...] = (4, 8, 9, 12, 16, 19, 20)
    coupled: tuple[tuple[int, int, float], ...] = ((7, 8, 0.18),)
    weak_indicators: tuple[int, ...] = (3, 17)
    weak_shift: float = 0.0
    uncovered_box: tuple[tuple[int, float], ...] = ()
    year: int = 2023
    project_id: str = "SYN"


def default_config(n: int, seed: int) -> SyntheticConfig:
    """The standard planted population: two High-class rules plus a coupled
    indicator; High records outside both rules carry a conjunctive signature
    of their own so every class boundary is threshold-shaped."""
    return SyntheticConfig(
        n=n,
        seed=seed,
        planted_rules=(
            PlantedRule(conditions=((12, 0.5), (20, 0.7)), target_class="High", coverage=0.58),
            PlantedRule(conditions=((8, 0.81),), target_class="High", coverage=0.50),
        ),
        uncovered_box=((4, 0.75), (16, 0.75), (19, 0.85)),
    )


def _validate_config(cfg: SyntheticConfig) -> None:
    if cfg.n < 0:
        raise SynthesisError("n must be non-negative")
    if not cfg.class_mix:
        raise SynthesisError("class_mix is empty")
    total = 0.0
    for cls, share in cfg.class_mix.items():
        if cls not in CATEGORIES:
            raise SynthesisError(f"unknown class {cls!r} in class_mix")
        if share < 0:
            raise SynthesisError(f"negative share for class {cls!r}")
        total += share
    if abs(total - 1.0) > 1e-9:
        raise SynthesisError(f"class_mix shares sum to {total:g}, expected 1")
    for ind in cfg.signal_indicators:
        if not 1 <= ind <= 21:
            raise SynthesisError(f"signal indicator {ind} outside 1..21")
    followers = set()
    for follower, leader, sd in cfg.coupled:
        if not (1 <= follower <= 21 and 1 <= leader <= 21) or follower == leader:
            raise SynthesisError(f"bad coupling {follower}->{leader}")
        if sd < 0:
            raise SynthesisError("coupling noise must be non-negative")
        if follower in cfg.signal_indicators:
            raise SynthesisError(f"coupled follower {follower} cannot also be a signal indicator")
        followers.add(follower)
    for ind in cfg.weak_indicators:
        if not 1 <= ind <= 21:
            raise SynthesisError(f"weak indicator {ind} outside 1..21")
        if ind in cfg.signal_indicators or ind in followers:
            raise SynthesisError(f"weak indicator {ind} overlaps the signal structure")
    for rule in cfg.planted_rules:
        if rule.target_class not in cfg.class_mix or cfg.class_mix[rule.target_class] <= 0:
            raise SynthesisError(
                f"planted rule targets class {rule.target_class!r} with no population share"
            )
        if not 0.0 <= rule.coverage <= 1.0:
            raise SynthesisError(f"rule coverage {rule.coverage:g} outside [0, 1]")
        if not rule.conditions:
            raise SynthesisError("planted rule has no conditions")
        seen = set()
        for ind, thr in rule.conditions:
            if not 1 <= ind <= 21:
                raise SynthesisError(f"rule condition on indicator {ind} outside 1..21")
            if ind in seen:
                raise SynthesisError(f"rule repeats indicator {ind}")
            seen.add(ind)
            if not 0.0 < thr <= 1.0:
                raise SynthesisError(f"rule threshold {thr:g} outside (0, 1]")
            if ind in followers:
                raise SynthesisError(f"rule condition on coupled follower indicator {ind}")
    rule_inds = {ind for rule in cfg.planted_rules for ind, _ in rule.conditions}
    for ind, thr in cfg.uncovered_box:
        if ind not in cfg.signal_indicators:
            raise SynthesisError(f"uncovered-box indicator {ind} is not a signal indicator")
        if ind in rule_inds:
            raise SynthesisError(f"uncovered-box indicator {ind} already appears in a rule")
        if not 0.0 < thr < 1.0:
            raise SynthesisError(f"uncovered-box threshold {thr:g} outside (0, 1)")


# ---------------------------------------------------------------------------
# Component realization: achievable score sets and raw-field inversion
# ---------------------------------------------------------------------------

_DEN_RANGES = {"I6.1": (2, 8), "I7.1": (2, 12), "I11.1": (1, 6)}


def _linear_levels(comp: ComponentSpec):
    """Achievable score set of a linear mapping, or None when continuous."""
    registry = load_field_registry()
    spec = registry[comp.codes[0]]
    if not spec.integer:
        return None
    best, worst = comp.params["best"], comp.params["worst"]
    lo_x, hi_x = min(best, worst), max(best, worst)
    if spec.min is not None:
        lo_x = max(lo_x, spec.min)
    if spec.max is not None:
        hi_x = min(hi_x, spec.max)
    levels = {(x - worst) / (best - worst) for x in range(int(np.ceil(lo_x)), int(np.floor(hi_x)) + 1)}
    if spec.max is None or spec.max > max(best, worst):
        levels.add(1.0 if best > worst else 0.0)
    return sorted(min(max(s, 0.0), 1.0) for s in levels)


def _component_levels(comp: ComponentSpec, dens: dict):
    """Sorted achievable scores for a component, or None if continuous."""
    if comp.kind == "tri":
        return [0.0, 0.5, 1.0]
    if comp.kind == "category":
        return sorted(set(float(v) for v in comp.params["map"].values()))
    if comp.kind == "max_risk":
        return [0.0, 0.5, 1.0]
    if comp.kind == "linear":
        return _linear_levels(comp)
    if comp.kind == "fraction":
        den = dens[comp.params["den"]]
        if den == 0:
            return [float(comp.params.get("zero_den_score", 1.0))]
        steps = int(round(comp.params["scale"] * den / min(w for _, w in comp.params["num"])))
        return [j / steps for j in range(steps + 1)]
    return None  # max_linear, activity_ratio, sample_params are continuous


def _pick_level(levels, target, rng):
    """Randomized rounding: nearest level below/above with proximity weights."""
    arr = np.asarray(levels)
    hi = int(np.searchsorted(arr, target))
    if hi == 0:
        return float(arr[0])
    if hi >= len(arr):
        return float(arr[-1])
    lo_v, hi_v = float(arr[hi - 1]), float(arr[hi])
    p_hi = (target - lo_v) / (hi_v - lo_v)
    return hi_v if rng.random() < p_hi else lo_v


def _realize_scores(ind, target, lo, hi, rng, dens):
    """Choose one achievable score per component with mean inside [lo, hi].

    Returns the list of scores, or None when the interval is unreachable
    with the current structural choices (caller retries).
    """
    comps = ind.components
    k = len(comps)
    level_sets = [_component_levels(c, dens) for c in comps]
    order = list(rng.permutation(k))
    scores = [0.0] * k
    remaining = target * k
    left = k
    for j in order:
        want = min(max(remaining / left, 0.0), 1.0)
        if level_sets[j] is None:
            scores[j] = want
        else:
            scores[j] = _pick_level(level_sets[j], want, rng)
        remaining -= scores[j]
        left -= 1

    def mean():
        return sum(scores) / k

    # Shift continuous components first, then step discrete ones.
    for _ in range(8 * k + 8):
        m = mean()
        if lo <= m <= hi:
            return scores
        need_up = m < lo
        moved = False
        for j in order:
            if level_sets[j] is None:
                goal = (lo + hi) / 2.0 if lo <= hi else lo
                delta = (goal - m) * k
                new = min(max(scores[j] + delta, 0.0), 1.0)
                if new != scores[j]:
                    scores[j] = new
                    moved = True
                    break
        if not moved:
            best_j, best_step = -1, None
            for j in order:
                levels = level_sets[j]
                if levels is None:
                    continue
                arr = levels
                pos = arr.index(scores[j]) if scores[j] in arr else None
                if pos is None:
                    continue
                if need_up and pos + 1 < len(arr):
                    step = arr[pos + 1] - arr[pos]
                elif not need_up and pos > 0:
                    step = arr[pos] - arr[pos - 1]
                else:
                    continue
                if best_step is None or step < best_step:
                    best_j, best_step = j, step
            if best_j < 0:
                return None
            arr = level_sets[best_j]
            pos = arr.index(scores[best_j])
            scores[best_j] = arr[pos + 1] if need_up else arr[pos - 1]
    return scores if lo <= mean() <= hi else None


def _invert_component(comp: ComponentSpec, score, dens, rng, values) -> None:
    """Write raw field values reproducing ``score`` for this component."""
    kind, params = comp.kind, comp.params
    if kind == "tri":
        values[comp.codes[0]] = _TRI_TOKENS[score]
        return
    if kind == "category":
        for token, v in params["map"].items():
            if float(v) == score:
                values[comp.codes[0]] = token
                return
        raise SynthesisError(f"no token for score {score} in {comp.id}")
    if kind == "linear":
        best, worst = params["best"], params["worst"]
        x = worst + score * (best - worst)
        spec = load_field_registry()[comp.codes[0]]
        if spec.integer:
            x = float(round(x))
            if score == 1.0 and spec.max is None and best > worst:
                x = float(int(best))
        values[comp.codes[0]] = x
        return
    if kind == "max_linear":
        best, worst = params["best"], params["worst"]
        m = worst + score * (best - worst)
        rest = (100.0 - m) / (len(comp.codes) - 1)
        top = comp.codes[int(rng.integers(len(comp.codes)))]
        for code in comp.codes:
            values[code] = m if code == top else min(rest, m)
        return
    if kind == "fraction":
        den_code = params["den"]
        den = dens[den_code]
        values[den_code] = float(den)
        if den == 0:
            for code, _w in params["num"]:
                values[code] = 0.0
            return
        min_w = min(w for _, w in params["num"])
        steps = int(round(params["scale"] * den / min_w))
        j = int(round(score * steps))
        # distribute j units of min_w across the numerator codes (each <= den)
        for code, _w in params["num"]:
            values[code] = 0.0
        unit = min_w
        budget = j * unit
        for code, w in sorted(params["num"], key=lambda cw: -cw[1]):
            take = min(int(budget / w), den)
            values[code] = float(take)
            budget -= take * w
            if budget <= 1e-12:
                break
        if budget > 1e-12:  # leftover smaller than the largest weight: use the lightest code
            code, w = min(params["num"], key=lambda cw: cw[1])
            extra = int(round(budget / w))
            values[code] = float(min(den, values[code] + extra))
        return
    if kind == "activity_ratio":
        rows = []
        for _ in range(1 + int(rng.random() < 0.3)):
            name, unit = _ACTIVITIES[int(rng.integers(len(_ACTIVITIES)))]
            region_prod = float(np.round(rng.uniform(10.0, 100.0), 2))
            region_price = float(np.round(rng.uniform(1.0, 40.0), 2))
            rows.append({
                "description": name,
                "unit": unit,
                "productivity": float(np.round(region_prod, 6)) * score,
                "price": region_price,
                "region_productivity": region_prod,
                "region_price": region_price,
            })
        values[comp.codes[0]] = rows
        return
    if kind == "sample_params":
        columns = params["columns"]
        rows = []
        for _ in range(1 + int(rng.random() < 0.25)):
            row = {}
            for name, p in columns.items():
                row[name] = p["worst"] + score * (p["best"] - p["worst"])
            rows.append(row)
        values[comp.codes[0]] = rows
        return
    if kind == "max_risk":
        if score == 1.0 and rng.random() < 0.3:
            values[comp.codes[0]] = []
            return
        risk = int(round(3 - 2 * score))
        rows = []
        for _ in range(1 + int(rng.integers(2))):
            rows.append({
                "product": _PRODUCTS[int(rng.integers(len(_PRODUCTS)))],
                "crop": _CROPS[int(rng.integers(len(_CROPS)))],
                "area_ha": float(np.round(rng.uniform(0.5, 30.0), 2)),
                "dose": float(np.round(rng.uniform(0.5, 5.0), 2)),
                "clay_class": str(int(rng.integers(1, risk + 1))),
                "distance_class": str(int(rng.integers(1, risk + 1))),
                "management_class": str(int(rng.integers(1, risk + 1))),
                "risk_class": str(risk),
            })
        values[comp.codes[0]] = rows
        return
    raise SynthesisError(f"unhandled component kind {kind}")


def _realize_indicator(ind, target, lo, hi, rng, values):
    """Realize one indicator into raw fields; returns the realized value."""
    dens = {}
    for comp in ind.components:
        if comp.kind == "fraction":
            den_code = comp.params["den"]
            if den_code not in dens:
                d_lo, d_hi = _DEN_RANGES.get(den_code, (1, 8))
                if "zero_den_score" in comp.params and target >= 0.97 and rng.random() < 0.3:
                    dens[den_code] = 0
                else:
                    dens[den_code] = int(rng.integers(d_lo, d_hi + 1))
    scores = _realize_scores(ind, target, lo, hi, rng, dens)
    if scores is None:
        return None
    for comp, score in zip(ind.components, scores):
        _invert_component(comp, score, dens, rng, values)
    return sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Whole-record construction
# ---------------------------------------------------------------------------


def _near_threshold_above(thr, rng):
    return min(1.0, thr + _PIN_MARGIN + (1.0 - thr) * 0.9 * rng.beta(1.2, 3.5))


def _near_threshold_below(thr, rng):
    span = min(thr, 0.35)
    return max(0.0, thr - _PIN_MARGIN - span * rng.beta(1.2, 3.5))


def _plan_pins(cfg, cls, flags, rng):
    """Per-indicator (lo, hi, target) pinning intervals implied by the rules.

    Covered conjuncts pin just above the threshold with mass leaning
    toward it.  Violated conjuncts pin below, again with mass near the
    threshold — scaled by how far the class profile naturally sits from
    it — so learners see both sides of every boundary.
    """
    pins: dict[int, tuple[float, float, float]] = {}
    sa, sb = _SIGNAL_BETA[cls]
    profile_mean = sa / (sa + sb)
    for rule, covered in zip(cfg.planted_rules, flags):
        if rule.target_class == cls and covered:
            for ind, thr in rule.conditions:
                target = _near_threshold_above(thr, rng)
                lo = thr + _PIN_MARGIN
                prev = pins.get(ind)
                if prev and prev[1] < lo:
                    return None
                pins[ind] = (max(lo, prev[0]) if prev else lo, 1.0, target)
        else:
            # violate: pick one conjunct not already pinned from below
            candidates = [c for c in rule.conditions if c[0] not in pins or pins[c[0]][0] == 0.0]
            if not candidates:
                return None
            ind, thr = candidates[int(rng.integers(len(candidates)))]
            if cls == rule.target_class:
                target = _near_threshold_below(thr, rng)
            else:
                span = min(max(thr - profile_mean, 0.1), thr)
                target = max(0.0, thr - _PIN_MARGIN - span * rng.beta(1.3, 2.2))
            hi = thr - _PIN_MARGIN
            prev = pins.get(ind)
            if prev and prev[0] > hi:
                return None
            pins[ind] = (0.0, min(hi, prev[1]) if prev else hi, target)
    if (
        cfg.uncovered_box
        and not any(flags)
        and cls in {r.target_class for r in cfg.planted_rules}
    ):
        # Records of the rules' target class that no rule covers get their
        # own conjunctive signature, keeping every class boundary aligned
        # with an indicator threshold.
        for ind, thr in cfg.uncovered_box:
            target = _near_threshold_above(thr, rng)
            lo = thr + _PIN_MARGIN
            prev = pins.get(ind)
            if prev and prev[1] < lo:
                return None
            pins[ind] = (max(lo, prev[0]) if prev else lo, 1.0, target)
    return pins


def _fill_background(q_values, header_seed_rng, cfg, rng):
    """Plausible class-independent values for everything outside the scoring path."""
    r = rng
    q_values["Q1"] = ""
    q_values["Q5"] = ("owner", "renter", "sharecropper", "partner", "other")[int(r.integers(5))]
    q_values["Q6"] = float(int(r.integers(22, 86)))
    q_values["Q7.3"] = float(np.round(r.uniform(18.0, 40.0), 1))
    q_values.setdefault("I6.2", float(int(r.integers(0, 4))))
    q_values["Q8.1"] = float(int(r.integers(0, 7)))
    q_values["Q8.2"] = float(int(r.integers(0, 10)))
    if r.random() < 0.6:
        q_values["Q8.3"] = float(int(r.integers(0, 4)))
    if r.random() < 0.4:
        q_values["Q8.4"] = float(int(r.integers(0, 3)))
    q_values["Q9.1"] = float(int(r.integers(1, 4)))
    q_values["Q9.2"] = float(int(r.integers(0, 4)))
    total_area = float(np.round(r.uniform(8.0, 220.0), 1))
    if r.random() < 0.9:
        shares = r.dirichlet((2.0, 3.0, 1.2, 0.8))
        uses = ("temporary_crops", "pasture", "native_vegetation", "non_agricultural")
        q_values["Q10.2"] = [
            {
                "use": u,
                "current_area_ha": float(np.round(total_area * s, 2)),
                "historic_area_ha": float(np.round(total_area * s * r.uniform(0.7, 1.3), 2)),
            }
            for u, s in zip(uses, shares)
        ]
    if r.random() < 0.8:
        q_values["Q10.1"] = [
            {
                "description": ("pasture", "maize field", "coffee plot", "orchard")[int(r.integers(4))],
                "area_ha": float(np.round(total_area * r.uniform(0.1, 0.5), 2)),
                "irrigation": ("none", "sprinkler", "drip")[int(r.integers(3))],
            }
            for _ in range(1 + int(r.integers(2)))
        ]
    income = float(np.round(np.exp(r.normal(11.2, 0.7)), 2))
    q_values["Q11.1"] = income
    if r.random() < 0.5:
        q_values["Q11.2"] = float(np.round(income * r.uniform(0.05, 0.5), 2))
    q_values["Q11.3"] = float(int(r.integers(1, 6)))
    q_values["Q12.1"] = float(np.round(np.exp(r.normal(11.8, 0.8)), 2))
    q_values["Q12.2"] = float(np.round(np.exp(r.normal(11.0, 0.9)), 2))
    q_values["Q12.3"] = float(np.round(np.exp(r.normal(11.3, 0.9)), 2))
    q_values["Q12.4"] = float(np.round(np.exp(r.normal(9.5, 1.1)), 2)) if r.random() < 0.7 else 0.0
    land_value = float(np.round(r.uniform(8000.0, 40000.0), 2))
    q_values["Q13.1"] = land_value
    q_values["Q13.3"] = float(np.round(land_value * total_area * r.uniform(0.8, 1.4), 2))
    q_values["Q14.1"] = float(int(r.integers(0, 5)))
    q_values["Q14.2"] = float(int(r.integers(0, 4)))
    q_values["Q14.3"] = float(int(r.integers(0, 3)))
    q_values["Q14.4"] = float(int(r.integers(0, 4)))
    q_values["Q14.5"] = ("spring", "well", "stream", "municipal_network")[int(r.integers(4))]
    q_values["Q14.6"] = ("none", "occasional", "frequent")[int(r.integers(3))]
    q_values["Q15.1"] = ("network", "septic_tank", "rudimentary_cesspool", "open_air")[int(r.integers(4))]
    q_values["Q15.2"] = ("public_collection", "recycled", "buried", "burned")[int(r.integers(4))]
    tri = ("insufficient", "partial", "sufficient")
    for code in ("Q16.1", "Q16.2", "Q16.3"):
        q_values[code] = tri[int(r.integers(3))]
    if r.random() < 0.8:
        k = 1 + int(r.integers(3))
        picks = r.choice(len(_PHRASES), size=k, replace=False)
        q_values["Q17"] = "; ".join(_PHRASES[int(i)] for i in picks)
    q_values["Q18.1"] = ("native_vegetation", "pasture", "crops")[int(r.integers(3))]
    for code in ("Q18.2", "Q18.3", "Q18.4", "Q18.5", "Q18.6", "Q18.7", "Q18.8", "Q18.9"):
        q_values[code] = tri[int(r.integers(3))]
    q_values["Q18.10"] = ("stones", "gravel", "sand", "silt", "mixed")[int(r.integers(5))]
    if r.random() < 0.7:
        q_values["G2.1"] = [
            {"use": "grassland", "area_ha": float(np.round(total_area * 0.5, 2))},
            {"use": "native_vegetation", "area_ha": float(np.round(total_area * 0.2, 2))},
        ]
    q_values["G4.1"] = float(np.round(total_area * r.uniform(0.02, 0.25), 2))
    if r.random() < 0.5:
        q_values["G4.2"] = float(np.round(total_area * r.uniform(0.0, 0.1), 2))
    return total_area


def _build_header(idx, cfg, rng) -> QuestionnaireHeader:
    muni = _MUNICIPALITIES[int(rng.integers(len(_MUNICIPALITIES)))]
    name, basin, meso, micro = muni
    month = int(rng.integers(1, 13))
    day = int(rng.integers(1, 28))
    return QuestionnaireHeader(
        property_code=f"P{idx + 1:05d}",
        project_id=cfg.project_id,
        institution_id="INST-01",
        interview_date=_dt.date(cfg.year, month, day),
        municipality=name,
        water_basin=basin,
        latitude=float(np.round(rng.uniform(-20.5, -16.5), 6)),
        longitude=float(np.round(rng.uniform(-46.5, -43.0), 6)),
        main_income=_INCOMES[int(rng.integers(len(_INCOMES)))],
        state="MG",
        meso_region=meso,
        micro_region=micro,
    )


def _satisfies(iv, rule: PlantedRule) -> bool:
    return all(iv.by_id(ind) >= thr for ind, thr in rule.conditions)


def _build_record(idx, cls, flags, cfg, rng):
    """One questionnaire whose re-scored class and rule flags match the plan."""
    table = load_scoring_table()
    followers = {f: (leader, sd) for f, leader, sd in cfg.coupled}
    signal = set(cfg.signal_indicators)
    si_lo, si_hi = _SI_WINDOWS[cls]
    sa, sb = _SIGNAL_BETA[cls]

    # Indicators outside the signal set are drawn once per record, before the
    # acceptance loop: retrying them alongside the window check would skew
    # their distribution toward whatever values make the window easy to hit,
    # and that skew differs by class.
    for _ in range(40):
        base_values: dict = {}
        base_realized: dict[int, float] = {}
        for ind in table.indicators:
            if ind.id in signal or ind.id in followers:
                continue
            if ind.id in cfg.weak_indicators:
                mu = min(max(0.68 + cfg.weak_shift * _WEAK_OFFSET[cls], 0.05), 0.95)
                t = rng.beta(mu * 25.0, (1.0 - mu) * 25.0)
            else:
                t = rng.beta(*_NONSIGNAL_BETA)
            r = _realize_indicator(ind, t, 0.0, 1.0, rng, base_values)
            if r is None:
                raise SynthesisError(f"indicator I{ind.id} rejected an open-range target")
            base_realized[ind.id] = r
        # Redraw only when the remaining indicators cannot plausibly steer
        # the mean into the class window (pins and niches do not span the
        # full unit interval, hence the conservative reach factors).
        flat_sum = sum(base_realized.values())
        n_open = len(table.indicators) - len(base_realized)
        if (flat_sum + 0.85 * n_open) / 21.0 >= si_lo and (
            flat_sum + 0.12 * n_open
        ) / 21.0 <= si_hi:
            break
    else:
        raise SynthesisError(f"no feasible base draw for a {cls} record (record {idx})")

    for _attempt in range(40):
        pins = _plan_pins(cfg, cls, flags, rng)
        if pins is None:
            continue
        values = dict(base_values)
        realized = dict(base_realized)

        ok = True
        for ind_id, (lo, hi, target) in sorted(pins.items()):
            r = _realize_indicator(table.indicator(ind_id), target, lo, hi, rng, values)
            if r is None:
                ok = False
                break
            realized[ind_id] = r
        if not ok:
            continue

        for f_id, (leader, sd) in sorted(followers.items()):
            base = realized.get(leader)
            if base is None:  # leader unpinned and free: realize it first below
                continue
            t = min(max(base + rng.normal(0.0, sd), 0.0), 1.0)
            r = _realize_indicator(table.indicator(f_id), t, 0.0, 1.0, rng, values)
            if r is None:
                ok = False
                break
            realized[f_id] = r
        if not ok:
            continue

        free = [i for i in sorted(signal) if i not in realized]
        pending_followers = [f for f in followers if f not in realized]
        fixed = sum(realized.values())
        # follower targets depend on leaders realized in the free pass; reserve
        # a plausible slot for them when judging window membership.
        reserve = len(pending_followers) * (sa / (sa + sb))
        nf = len(free)
        lo, hi = si_lo, si_hi
        if nf == 0:
            si = (fixed + reserve) / 21.0
            if not (lo <= si <= hi):
                continue
        else:
            niche_a, niche_b = _NICHE_BETA[cls]
            if cls == "High" and not any(flags):
                niches = rng.beta(*_UNCOVERED_BETA, size=nf)
            else:
                niches = np.where(
                    rng.random(nf) < _NICHE_EXPRESS[cls],
                    rng.beta(niche_a, niche_b, size=nf),
                    rng.beta(*_NICHE_FALLBACK, size=nf),
                )
            # Accept the draws only when they already land inside the SI
            # window: adjusting them instead would couple otherwise-free
            # indicators to the class through the shared budget.  Windows
            # the profiles rarely reach on their own (extreme class mixes)
            # eventually fall back to a shared shift so generation still
            # terminates.
            natural = (fixed + reserve + float(niches.sum())) / 21.0
            if not (lo <= natural <= hi):
                if _attempt < 24:
                    continue
                margin = min(0.004, (hi - lo) / 4.0)
                budget = min(max(natural, lo + margin), hi - margin) * 21.0 - fixed - reserve
                niches = niches + (budget - float(niches.sum())) / nf
                for _ in range(6):
                    niches = np.clip(niches, 0.0, 1.0)
                    gap = budget - float(niches.sum())
                    if abs(gap) < 1e-12:
                        break
                    room = (niches < 1.0) if gap > 0 else (niches > 0.0)
                    if not room.any():
                        break
                    niches = np.where(room, niches + gap / float(room.sum()), niches)
                niches = np.clip(niches, 0.0, 1.0)
            # Score grids rarely land exactly on a target; steer each next
            # target against the rounding drift accumulated so far, so the
            # realized SI tracks the drawn one.
            drift = 0.0
            for j, ind_id in enumerate(free):
                t = min(max(float(niches[j]) - drift, 0.0), 1.0)
                r = _realize_indicator(table.indicator(ind_id), t, 0.0, 1.0, rng, values)
                if r is None:
                    ok = False
                    break
                realized[ind_id] = r
                drift += r - float(niches[j])
            if not ok:
                continue

        for f_id in pending_followers:
            leader, sd = followers[f_id]
            t = min(max(realized[leader] + rng.normal(0.0, sd), 0.0), 1.0)
            r = _realize_indicator(table.indicator(f_id), t, 0.0, 1.0, rng, values)
            if r is None:
                ok = False
                break
            realized[f_id] = r
        if not ok:
            continue

        header = _build_header(idx, cfg, rng)
        _fill_background(values, None, cfg, rng)
        q = Questionnaire(header=header, values=values)

        iv = compute_indicator_vector(q)
        si = compute_si(iv)
        if categorize(si) != cls:
            continue
        if cfg.uncovered_box:
            in_box = all(iv.by_id(i) >= t for i, t in cfg.uncovered_box)
            if cls in {r.target_class for r in cfg.planted_rules}:
                if not any(flags) and not in_box:
                    continue
            elif in_box:
                continue
        flags_ok = True
        for rule, covered in zip(cfg.planted_rules, flags):
            want = covered and rule.target_class == cls
            if _satisfies(iv, rule) != want:
                flags_ok = False
                break
        if flags_ok:
            return q
    raise SynthesisError(
        f"could not realize a {cls} record under the configured rules (record {idx})"
    )


def generate_synthetic(cfg: SyntheticConfig) -> list[Questionnaire]:
    """Generate ``cfg.n`` valid questionnaires with the planted structure.

    Deterministic in ``cfg.seed``: records are built from per-record
    child generators, so the output is independent of evaluation order.
    """
    _validate_config(cfg)
    if cfg.n == 0:
        return []

    alloc_rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x5EED)))
    classes = sorted(cfg.class_mix, key=CATEGORIES.index)
    shares = np.array([cfg.class_mix[c] for c in classes], dtype=np.float64)
    counts = np.floor(shares * cfg.n).astype(np.int64)
    remainder = shares * cfg.n - counts
    for _ in range(cfg.n - int(counts.sum())):
        j = int(np.argmax(remainder))
        counts[j] += 1
        remainder[j] = -1.0
    assignment = np.repeat(np.arange(len(classes)), counts)
    alloc_rng.shuffle(assignment)

    flag_plan: list[list[bool]] = [[False] * len(cfg.planted_rules) for _ in range(cfg.n)]
    for r_idx, rule in enumerate(cfg.planted_rules):
        members = np.nonzero(assignment == classes.index(rule.target_class))[0]
        k = int(round(rule.coverage * members.size))
        # Prefer members no earlier rule covers — the planted rules should
        # jointly describe their class — but keep a small slice of the class
        # outside every rule so it is only recognizable from the diffuse
        # indicator profile.
        uncovered = np.array([not any(flag_plan[int(i)]) for i in members], dtype=bool)
        covered_cap = int(round((1.0 - _UNCOVERED_SHARE) * members.size))
        take_new = min(k, max(0, covered_cap - int((~uncovered).sum())))
        order = np.concatenate([
            alloc_rng.permutation(members[uncovered])[:take_new],
            alloc_rng.permutation(members[~uncovered]),
        ])
        for i in order[:k]:
            flag_plan[int(i)][r_idx] = True

    out = []
    for idx in range(cfg.n):
        cls = classes[int(assignment[idx])]
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 1, idx)))
        out.append(_build_record(idx, cls, flag_plan[idx], cfg, rng))
    return out
