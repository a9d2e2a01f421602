"""Ordered rule induction with incremental reduced-error pruning.

Classes are handled from rarest to most frequent.  For each class a
ruleset is built by repeatedly splitting the remaining data 2:1 into
grow/prune portions (stratified), growing one rule condition-by-condition
to maximize FOIL gain, pruning it back to the final-sequence truncation
with the best ``(p - n) / (p + n)`` on the prune portion, and accepting
it under a description-length budget: construction stops once the total
description length exceeds the best seen by 64 bits, or when a candidate
rule is no better than chance on the prune portion.  One optimization
pass then revisits each rule, choosing by description length between the
original, a regrown replacement, and a revision with extra conjuncts,
followed by a mop-up for still-uncovered positives and a deletion sweep.
Uncovered instances fall through to the majority default class.

Description lengths use exceptions coding for the data (exact
log-binomials) and half-weighted subset coding for rule bodies, the
usual redundancy discount.
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from .base import Model, register_model, require_training_data

_DL_BUDGET = 64.0


def _log2_binom(n: int, k: int) -> float:
    if k < 0 or k > n:
        return 0.0
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2.0)


def _theory_bits(n_conditions: int, pool: int) -> float:
    if n_conditions == 0:
        return 0.0
    return 0.5 * (_log2_binom(pool, n_conditions) + math.log2(n_conditions + 1))


def _data_bits(cov: int, unc: int, fp: int, fn: int) -> float:
    return (
        math.log2(cov + 1) + _log2_binom(cov, fp)
        + math.log2(unc + 1) + _log2_binom(unc, fn)
    )


def _matches(conds, X, rows) -> np.ndarray:
    """Boolean mask over ``rows`` of instances satisfying every condition."""
    mask = np.ones(rows.size, dtype=bool)
    for attr, op, value in conds:
        col = X[rows, attr]
        if op == "<=":
            mask &= col <= value
        elif op == ">=":
            mask &= col >= value
        else:
            mask &= col == value
    return mask


def _ruleset_dl(rules, X, rows, is_pos, pool) -> float:
    """Total description length of a ruleset for the binary pos/neg task."""
    uncovered = np.ones(rows.size, dtype=bool)
    fp = 0
    theory = 0.0
    for conds, _stats in rules:
        m = _matches(conds, X, rows) & uncovered
        fp += int((m & ~is_pos).sum())
        uncovered &= ~m
        theory += _theory_bits(len(conds), pool)
    cov = int(rows.size - uncovered.sum())
    fn = int((uncovered & is_pos).sum())
    return theory + _data_bits(cov, int(uncovered.sum()), fp, fn)


def _grow_rule(X, kinds, grow_rows, grow_pos, start_conds, rng):
    """Greedy FOIL-gain growth until no negatives remain or gain stops."""
    conds = list(start_conds)
    rows = grow_rows
    pos_mask = grow_pos
    if conds:
        keep = _matches(conds, X, rows)
        rows, pos_mask = rows[keep], pos_mask[keep]
    while True:
        P = int(pos_mask.sum())
        N = rows.size - P
        if P == 0 or N == 0:
            break
        base = math.log2(P / (P + N))
        used_nominal = {c[0] for c in conds if c[1] == "=="}
        best_gain, best = 0.0, None
        for j in range(X.shape[1]):
            if kinds[j] == "nominal":
                if j in used_nominal:
                    continue
                col = X[rows, j].astype(np.int64)
                width = int(col.max()) + 1 if col.size else 0
                pc = np.bincount(col[pos_mask], minlength=width).astype(np.float64)
                tc = np.bincount(col, minlength=width).astype(np.float64)
                with np.errstate(divide="ignore", invalid="ignore"):
                    gains = np.where(pc > 0, pc * (np.log2(pc / tc, where=pc > 0) - base), -np.inf)
                v = int(np.argmax(gains))
                if gains[v] > best_gain + 1e-12:
                    best_gain, best = float(gains[v]), (j, "==", float(v))
            else:
                col = X[rows, j]
                order = np.argsort(col, kind="stable")
                sv = col[order]
                sp = pos_mask[order]
                last = np.nonzero(np.append(sv[1:] > sv[:-1], True))[0]
                cp = np.cumsum(sp)[last].astype(np.float64)
                ct = (last + 1).astype(np.float64)
                vals = sv[last]
                with np.errstate(divide="ignore", invalid="ignore"):
                    g_le = np.where(cp > 0, cp * (np.log2(cp / ct, where=cp > 0) - base), -np.inf)
                rp = P - np.concatenate(([0.0], cp[:-1]))
                rt = rows.size - np.concatenate(([0.0], ct[:-1]))
                with np.errstate(divide="ignore", invalid="ignore"):
                    g_ge = np.where(rp > 0, rp * (np.log2(rp / rt, where=rp > 0) - base), -np.inf)
                i_le = int(np.argmax(g_le))
                if g_le[i_le] > best_gain + 1e-12:
                    best_gain, best = float(g_le[i_le]), (j, "<=", float(vals[i_le]))
                i_ge = int(np.argmax(g_ge))
                if g_ge[i_ge] > best_gain + 1e-12:
                    best_gain, best = float(g_ge[i_ge]), (j, ">=", float(vals[i_ge]))
        if best is None:
            break
        conds.append(best)
        keep = _matches([best], X, rows)
        rows, pos_mask = rows[keep], pos_mask[keep]
    return conds


def _prune_rule(X, conds, prune_rows, prune_pos, min_keep=0):
    """Best final-sequence truncation by (p-n)/(p+n); shorter wins ties."""
    if not conds:
        return conds
    best_i, best_worth = len(conds), None
    mask = np.ones(prune_rows.size, dtype=bool)
    worths = []
    for i, cond in enumerate(conds, start=1):
        mask &= _matches([cond], X, prune_rows)
        p = int((mask & prune_pos).sum())
        n = int(mask.sum()) - p
        worths.append(-1.0 if p + n == 0 else (p - n) / (p + n))
    for i in range(max(min_keep, 1), len(conds) + 1):
        w = worths[i - 1]
        if best_worth is None or w > best_worth + 1e-12:
            best_worth, best_i = w, i
    return conds[:best_i]


def _split_grow_prune(rows, is_pos, rng):
    """Stratified 2:1 split of the task rows into grow and prune parts."""
    grow, prune = [], []
    for mask in (is_pos, ~is_pos):
        part = rows[mask]
        rng.shuffle(part)
        cut = int(round(part.size * 2 / 3))
        grow.append(part[:cut])
        prune.append(part[cut:])
    return np.concatenate(grow), np.concatenate(prune)


def _rule_stats(X, y, conds, rows):
    m = _matches(conds, X, rows)
    return int(m.sum()), rows[m]


@register_model
class RuleSetModel(Model):
    """Ordered first-match rules plus a default class."""

    kind = "rules"

    def __init__(self, attributes, class_values, rules, default_class, default_dist):
        super().__init__(attributes, class_values)
        self.rules = list(rules)  # {"conds": [(attr, op, value)], "cls", "covered", "correct", "dist"}
        self.default_class = int(default_class)
        self.default_dist = list(default_dist)

    def distributions(self, X):
        n, c = X.shape[0], len(self.class_values)
        out = np.zeros((n, c), dtype=np.float64)
        unassigned = np.arange(n)
        for rule in self.rules:
            if unassigned.size == 0:
                break
            m = _matches(rule["conds"], X, unassigned)
            hit = unassigned[m]
            if hit.size:
                dist = np.asarray(rule["dist"], dtype=np.float64) + 1.0
                out[hit] = dist / dist.sum()
            unassigned = unassigned[~m]
        if unassigned.size:
            dist = np.asarray(self.default_dist, dtype=np.float64) + 1.0
            out[unassigned] = dist / dist.sum()
        return out

    def _state(self):
        return {
            "rules": [
                {
                    "conds": [[a, op, v] for a, op, v in r["conds"]],
                    "cls": r["cls"], "covered": r["covered"],
                    "correct": r["correct"], "dist": r["dist"],
                }
                for r in self.rules
            ],
            "default_class": self.default_class,
            "default_dist": self.default_dist,
        }

    @classmethod
    def _from_state(cls, state, attributes, class_values):
        rules = [
            {
                "conds": [(int(a), op, float(v)) for a, op, v in r["conds"]],
                "cls": int(r["cls"]), "covered": int(r["covered"]),
                "correct": int(r["correct"]), "dist": list(r["dist"]),
            }
            for r in state["rules"]
        ]
        return cls(attributes, class_values, rules, state["default_class"], state["default_dist"])


def format_condition(model: RuleSetModel, cond) -> str:
    attr, op, value = cond
    spec = model.attributes[attr]
    if op == "==":
        return f"{spec.name} = {spec.values[int(value)]}"
    return f"{spec.name} {op} {value:g}"


def format_rules(model: RuleSetModel) -> str:
    """One rule per line with training-coverage annotations."""
    lines = []
    for rule in model.rules:
        conds = " AND ".join(format_condition(model, c) for c in rule["conds"])
        lines.append(
            f"IF {conds} THEN class={model.class_values[rule['cls']]}"
            f" (covered={rule['covered']}, correct={rule['correct']})"
        )
    total = sum(int(v) for v in model.default_dist)
    correct = int(model.default_dist[model.default_class]) if model.default_dist else 0
    lines.append(
        f"OTHERWISE class={model.class_values[model.default_class]}"
        f" (covered={total}, correct={correct})"
    )
    return "\n".join(lines) + "\n"


def _build_class_rules(X, kinds, pool, task_rows, is_pos_all, rng):
    """IREP* loop for one class; returns a list of condition tuples."""

    def is_pos(rows):
        return is_pos_all[rows]

    rules: list = []
    covered = np.zeros(X.shape[0], dtype=bool)

    def active_rows():
        return task_rows[~covered[task_rows]]

    def current_dl(extra=None):
        rows = task_rows
        rs = [(r, None) for r in rules] + ([(extra, None)] if extra is not None else [])
        return _ruleset_dl(rs, X, rows, is_pos_all[rows], pool)

    min_dl = current_dl()
    while True:
        rows = active_rows()
        pos_left = int(is_pos(rows).sum())
        if pos_left == 0:
            break
        grow_rows, prune_rows = _split_grow_prune(rows.copy(), is_pos(rows), rng)
        conds = _grow_rule(X, kinds, grow_rows, is_pos(grow_rows), [], rng)
        if not conds:
            break
        conds = _prune_rule(X, conds, prune_rows, is_pos(prune_rows))
        pm = _matches(conds, X, prune_rows)
        p = int((pm & is_pos(prune_rows)).sum())
        n = int(pm.sum()) - p
        if prune_rows.size and p + n > 0 and p / (p + n) < 0.5:
            break
        dl = current_dl(extra=conds)
        if dl > min_dl + _DL_BUDGET:
            break
        min_dl = min(min_dl, dl)
        rules.append(conds)
        m = _matches(conds, X, rows)
        covered[rows[m]] = True

    # --- one optimization pass -------------------------------------
    for i in range(len(rules)):
        others = rules[:i] + rules[i + 1:]
        blocked = np.zeros(X.shape[0], dtype=bool)
        for conds in others:
            rows = task_rows[~blocked[task_rows]]
            m = _matches(conds, X, rows)
            blocked[rows[m]] = True
        rows = task_rows[~blocked[task_rows]]
        if rows.size < 3 or int(is_pos(rows).sum()) == 0:
            continue
        grow_rows, prune_rows = _split_grow_prune(rows.copy(), is_pos(rows), rng)
        replacement = _grow_rule(X, kinds, grow_rows, is_pos(grow_rows), [], rng)
        replacement = _prune_rule(X, replacement, prune_rows, is_pos(prune_rows))
        revision = _grow_rule(X, kinds, grow_rows, is_pos(grow_rows), rules[i], rng)
        revision = _prune_rule(X, revision, prune_rows, is_pos(prune_rows),
                               min_keep=len(rules[i]))
        variants = [rules[i]]
        if replacement:
            variants.append(replacement)
        if revision:
            variants.append(revision)
        dls = []
        for v in variants:
            trial = rules[:i] + [v] + rules[i + 1:]
            dls.append(_ruleset_dl([(r, None) for r in trial], X, task_rows,
                                   is_pos_all[task_rows], pool))
        rules[i] = variants[int(np.argmin(dls))]

    # mop-up: cover remaining positives under the same DL budget
    covered = np.zeros(X.shape[0], dtype=bool)
    for conds in rules:
        rows = task_rows[~covered[task_rows]]
        m = _matches(conds, X, rows)
        covered[rows[m]] = True
    min_dl = current_dl()
    while True:
        rows = active_rows()
        if int(is_pos(rows).sum()) == 0:
            break
        grow_rows, prune_rows = _split_grow_prune(rows.copy(), is_pos(rows), rng)
        conds = _grow_rule(X, kinds, grow_rows, is_pos(grow_rows), [], rng)
        if not conds:
            break
        conds = _prune_rule(X, conds, prune_rows, is_pos(prune_rows))
        pm = _matches(conds, X, prune_rows)
        p = int((pm & is_pos(prune_rows)).sum())
        n = int(pm.sum()) - p
        if prune_rows.size and p + n > 0 and p / (p + n) < 0.5:
            break
        dl = current_dl(extra=conds)
        if dl > min_dl + _DL_BUDGET:
            break
        min_dl = min(min_dl, dl)
        rules.append(conds)
        m = _matches(conds, X, rows)
        covered[rows[m]] = True

    # deletion sweep: drop rules whose removal shortens the description
    i = 0
    while i < len(rules):
        without = rules[:i] + rules[i + 1:]
        dl_with = _ruleset_dl([(r, None) for r in rules], X, task_rows,
                              is_pos_all[task_rows], pool)
        dl_without = _ruleset_dl([(r, None) for r in without], X, task_rows,
                                 is_pos_all[task_rows], pool)
        if dl_without < dl_with - 1e-9:
            rules = without
        else:
            i += 1
    return rules


def train_ripper(ds: Dataset, seed: int = 0) -> RuleSetModel:
    """Induce an ordered ruleset, rarest class first."""
    require_training_data(ds)
    X, y = ds.X, ds.y
    kinds = [a.kind for a in ds.attributes]
    n_classes = len(ds.class_values)
    counts = ds.class_counts()
    pool = sum(2 if k == "numeric" else len(ds.attributes[j].values)
               for j, k in enumerate(kinds))
    order = sorted(range(n_classes), key=lambda c: (counts[c], c))
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x41FE)))

    all_rules: list[dict] = []
    remaining = np.arange(len(ds))
    for cls in order[:-1]:
        if counts[cls] == 0 or remaining.size == 0:
            continue
        is_pos_all = np.zeros(len(ds), dtype=bool)
        is_pos_all[remaining[y[remaining] == cls]] = True
        class_rules = _build_class_rules(X, kinds, pool, remaining, is_pos_all, rng)
        for conds in class_rules:
            all_rules.append({"conds": [tuple(c) for c in conds], "cls": int(cls)})
        keep = np.ones(remaining.size, dtype=bool)
        for conds in class_rules:
            keep &= ~_matches(conds, X, remaining)
        remaining = remaining[keep]

    # first-match coverage annotations on the training data
    unassigned = np.arange(len(ds))
    for rule in all_rules:
        m = _matches(rule["conds"], X, unassigned)
        hit = unassigned[m]
        dist = np.bincount(y[hit], minlength=n_classes)
        rule["covered"] = int(hit.size)
        rule["correct"] = int(dist[rule["cls"]])
        rule["dist"] = dist.tolist()
        unassigned = unassigned[~m]
    default_dist = np.bincount(y[unassigned], minlength=n_classes)
    if unassigned.size:
        default_class = int(np.argmax(default_dist))
    else:
        default_class = int(np.argmax(counts))
    return RuleSetModel(tuple(ds.attributes), tuple(ds.class_values),
                        all_rules, default_class, default_dist.tolist())
