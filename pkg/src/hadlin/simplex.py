"""Exact-rational linear programming.

Model: named variables, implicit lower bound 0, sparse rational rows with
<= / = / >= relations, max or min objective.  Solver: revised primal simplex
with a product-form inverse, two-phase feasibility (no big-M), and Bland's
rule by default (Dantzig-style pricing is available as a speed heuristic;
the final basis is always re-verified by exact substitution either way).

Large instances can be warm-started from a floating-point solve whose basis
guess is verified and, if necessary, repaired with exact pivots; reported
values never come from the float path.
"""

from dataclasses import dataclass

from .rational import Rat, ZERO

__all__ = ["LinearProgram", "LpOutcome", "solve"]


@dataclass
class LpOutcome:
    status: str  # "optimal" | "infeasible" | "unbounded" | "gave_up"
    value: object = None
    assignment: dict = None
    pivots: int = 0

    @property
    def is_optimal(self):
        return self.status == "optimal"


class LinearProgram:
    """Sparse exact-rational LP with named, nonnegative variables."""

    def __init__(self, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError("sense must be 'max' or 'min'")
        self.sense = sense
        self.var_names = []
        self._var_index = {}
        self.objective = {}
        self.rows = []  # (coeffs dict var_idx -> Rat, rel, rhs)

    def add_var(self, name: str, obj=0) -> int:
        if name in self._var_index:
            raise ValueError(f"duplicate variable {name!r}")
        idx = len(self.var_names)
        self.var_names.append(name)
        self._var_index[name] = idx
        if obj:
            self.objective[idx] = Rat(obj)
        return idx

    def set_obj(self, var, coeff):
        idx = self._resolve(var)
        coeff = Rat(coeff)
        if coeff == 0:
            self.objective.pop(idx, None)
        else:
            self.objective[idx] = coeff

    def add_obj(self, var, coeff):
        idx = self._resolve(var)
        c = self.objective.get(idx, ZERO) + Rat(coeff)
        if c == 0:
            self.objective.pop(idx, None)
        else:
            self.objective[idx] = c

    def add_row(self, coeffs: dict, rel: str, rhs):
        if rel not in ("<=", "=", ">="):
            raise ValueError(f"bad relation {rel!r}")
        clean = {}
        for var, c in coeffs.items():
            idx = self._resolve(var)
            c = Rat(c)
            if c != 0:
                clean[idx] = clean.get(idx, ZERO) + c
        clean = {i: c for i, c in clean.items() if c != 0}
        self.rows.append((clean, rel, Rat(rhs)))

    def _resolve(self, var) -> int:
        if isinstance(var, str):
            return self._var_index[var]
        idx = int(var)
        if not 0 <= idx < len(self.var_names):
            raise ValueError(f"unknown variable {var}")
        return idx

    @property
    def n_vars(self):
        return len(self.var_names)

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_nonzeros(self):
        return sum(len(r[0]) for r in self.rows)

    def stats(self):
        return (self.n_rows, self.n_vars, self.n_nonzeros)

    def check_assignment(self, assignment: dict, strict=True):
        """Exact substitution; returns the first violated row index or None."""
        vals = [ZERO] * self.n_vars
        for name, v in assignment.items():
            vals[self._resolve(name)] = Rat(v)
        if strict and any(v < 0 for v in vals):
            return -1
        for i, (coeffs, rel, rhs) in enumerate(self.rows):
            lhs = sum((c * vals[j] for j, c in coeffs.items()), ZERO)
            if rel == "<=" and lhs > rhs:
                return i
            if rel == ">=" and lhs < rhs:
                return i
            if rel == "=" and lhs != rhs:
                return i
        return None

    def objective_value(self, assignment: dict):
        vals = {self._resolve(nm): Rat(v) for nm, v in assignment.items()}
        return sum((c * vals.get(j, ZERO) for j, c in self.objective.items()), ZERO)

    def solve(self, **kw) -> LpOutcome:
        return solve(self, **kw)


# ---------------------------------------------------------------------------
# solver core


class _Standard:
    """maximize c x s.t. Ax = b (b >= 0), x >= 0, with slack/artificial columns."""

    def __init__(self, lp: LinearProgram):
        self.lp = lp
        m = lp.n_rows
        n = lp.n_vars
        sign = 1 if lp.sense == "max" else -1
        self.cols = [[] for _ in range(n)]  # structural columns: list of (row, val)
        self.b = []
        rows_rel = []
        for i, (coeffs, rel, rhs) in enumerate(lp.rows):
            flip = rhs < 0
            if flip:
                rhs = -rhs
                rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
            rows_rel.append(rel)
            self.b.append(rhs)
            for j, c in coeffs.items():
                self.cols[j].append((i, -c if flip else c))
        self.c = [sign * lp.objective.get(j, ZERO) for j in range(n)]
        self.obj_sign = sign
        # slack / surplus columns
        self.slack_of_row = [-1] * m  # usable as a feasible identity start (<= rows)
        self.rowcol_of_row = [-1] * m  # slack or surplus column of the row, if any
        for i, rel in enumerate(rows_rel):
            if rel == "<=":
                j = len(self.cols)
                self.cols.append([(i, Rat(1))])
                self.c.append(ZERO)
                self.slack_of_row[i] = j
                self.rowcol_of_row[i] = j
            elif rel == ">=":
                j = len(self.cols)
                self.cols.append([(i, Rat(-1))])
                self.c.append(ZERO)
                self.rowcol_of_row[i] = j
        self.n_real = len(self.cols)
        # artificial identity columns, one per row (used only as needed)
        self.art_of_row = []
        for i in range(m):
            j = len(self.cols)
            self.cols.append([(i, Rat(1))])
            self.c.append(ZERO)
            self.art_of_row.append(j)
        self.m = m

    def is_artificial(self, j):
        return j >= self.n_real


class _Basis:
    """Product-form inverse over a basis column list."""

    def __init__(self, std: _Standard):
        self.std = std
        self.basis = []
        self.etas = []  # (pivot_row, {row: val}) with val[pivot_row] = pivot element

    def ftran(self, vec: dict) -> dict:
        x = dict(vec)
        for r, col in self.etas:
            xr = x.get(r)
            if not xr:
                continue
            piv = col[r]
            xr = xr / piv
            for i, v in col.items():
                if i == r:
                    continue
                nv = x.get(i, ZERO) - v * xr
                if nv:
                    x[i] = nv
                else:
                    x.pop(i, None)
            x[r] = xr
        return x

    def btran(self, vec: dict) -> dict:
        y = dict(vec)
        for r, col in reversed(self.etas):
            acc = ZERO
            for i, v in col.items():
                if i == r:
                    continue
                yi = y.get(i)
                if yi:
                    acc += yi * v
            yr = y.get(r, ZERO)
            nv = (yr - acc) / col[r]
            if nv:
                y[r] = nv
            else:
                y.pop(r, None)
        return y

    def column(self, j) -> dict:
        return self.ftran({i: v for i, v in self.std.cols[j]})

    def set_basis(self, cols, allow_repair=True):
        """Factorize the given column set; dependent columns are replaced by
        artificials (returned for phase-1 handling).

        Columns whose support avoids every pivot row chosen so far need no
        elimination (their eta is the raw column), so a greedy triangular
        ordering keeps both fill and work near-linear on flow-like bases.
        """
        m = self.std.m
        self.etas = []
        self.basis = [-1] * m
        used = [False] * m
        order = sorted(set(cols), key=lambda j: (len(self.std.cols[j]), j))
        contaminated = {j: 0 for j in order}
        rows_touching = {}
        for j in order:
            for i, _v in self.std.cols[j]:
                rows_touching.setdefault(i, []).append(j)
        import heapq

        heap = [(0, len(self.std.cols[j]), j) for j in order]
        heapq.heapify(heap)
        pending = set(order)
        deferred = []
        while heap:
            cont, _sz, j = heapq.heappop(heap)
            if j not in pending or cont != contaminated[j]:
                continue
            if cont > 0:
                deferred.append(j)
                pending.discard(j)
                continue
            pending.discard(j)
            # untouched column: eta is the raw column
            d = {i: v for i, v in self.std.cols[j]}
            r = None
            best = None
            for i in d:
                if not used[i]:
                    deg = len(rows_touching.get(i, ()))
                    if r is None or deg < best:
                        r, best = i, deg
            if r is None:
                if not allow_repair:
                    raise ValueError("basis is singular")
                continue
            used[r] = True
            self.basis[r] = j
            self.etas.append((r, d))
            for j2 in rows_touching.get(r, ()):
                if j2 in pending:
                    contaminated[j2] += 1
                    heapq.heappush(heap, (contaminated[j2], len(self.std.cols[j2]), j2))
        for j in deferred:
            d = self.column(j)
            r = None
            for i in sorted(d):
                if not used[i] and d[i] != 0:
                    r = i
                    break
            if r is None:
                if not allow_repair:
                    raise ValueError("basis is singular")
                continue
            used[r] = True
            self.basis[r] = j
            self.etas.append((r, d))
        repaired = []
        for i in range(m):
            if not used[i]:
                j = self.std.art_of_row[i]
                d = self.column(j)
                assert d.get(i, ZERO) != 0
                self.basis[i] = j
                self.etas.append((i, d))
                repaired.append(i)
        return repaired

    def refactor(self):
        self.set_basis([j for j in self.basis if j >= 0], allow_repair=False)


def _price_bland(std, basis_set, y, costs, skip):
    for j in range(len(std.cols)):
        if j in basis_set or j in skip:
            continue
        cj = costs[j]
        red = cj - sum((y.get(i, ZERO) * v for i, v in std.cols[j]), ZERO)
        if red > 0:
            return j, red
    return None, None


def _price_dantzig(std, basis_set, y, costs, skip):
    best, bestred = None, None
    for j in range(len(std.cols)):
        if j in basis_set or j in skip:
            continue
        cj = costs[j]
        red = cj - sum((y.get(i, ZERO) * v for i, v in std.cols[j]), ZERO)
        if red > 0 and (bestred is None or red > bestred):
            best, bestred = j, red
    return best, bestred


def _simplex_phase(std, B: _Basis, costs, skip, pivot_limit, rule, state):
    """Run primal simplex to optimality for the given cost vector.

    Returns (status, xB) with status in {"optimal", "unbounded", "gave_up"}.
    """
    m = std.m
    xB = B.ftran({i: std.b[i] for i in range(m) if std.b[i] != 0})
    assert all(v >= 0 for v in xB.values()), "starting basis must be primal feasible"
    degenerate_run = 0
    pricer = _price_dantzig if rule == "dantzig" else _price_bland
    while True:
        if state["pivots"] >= pivot_limit:
            return "gave_up", xB
        basis_set = set(B.basis)
        cB = {}
        for i, j in enumerate(B.basis):
            cj = costs[j]
            if cj != 0:
                cB[i] = cj
        y = B.btran(cB)
        use_bland = rule == "bland" or degenerate_run > 12
        j, _red = (_price_bland if use_bland else pricer)(std, basis_set, y, costs, skip)
        if j is None:
            return "optimal", xB
        d = B.column(j)
        # ratio test (Bland ties: smallest basis variable index); basic
        # artificials at zero also leave on nonzero components so they can
        # never drift positive again
        theta = None
        leave = None
        for i, v in d.items():
            if v > 0:
                ratio = xB.get(i, ZERO) / v
            elif (
                v < 0
                and std.is_artificial(B.basis[i])
                and xB.get(i, ZERO) == 0
            ):
                ratio = ZERO
            else:
                continue
            if theta is None or ratio < theta or (
                ratio == theta and B.basis[i] < B.basis[leave]
            ):
                theta, leave = ratio, i
        if theta is None:
            return "unbounded", xB
        degenerate_run = degenerate_run + 1 if theta == 0 else 0
        # update xB and basis
        if theta != 0:
            for i, v in d.items():
                if i == leave:
                    continue
                nv = xB.get(i, ZERO) - theta * v
                if nv:
                    xB[i] = nv
                else:
                    xB.pop(i, None)
        xB.pop(leave, None)
        if theta != 0:
            xB[leave] = theta
        B.basis[leave] = j
        B.etas.append((leave, d))
        state["pivots"] += 1
        if len(B.etas) > max(3 * m, 256):
            B.refactor()
            xB = B.ftran({i: std.b[i] for i in range(m) if std.b[i] != 0})


def solve(lp: LinearProgram, pivot_limit=2_000_000, rule="bland", basis_hint=None,
          float_guided=False, verify=True) -> LpOutcome:
    """Exact optimum of the LP; deterministic for a fixed rule.

    `basis_hint` is an iterable of column identifiers (variable indices, or
    ("slack", row) pairs) to warm-start from.  `float_guided` computes such a
    hint with a floating-point solve first; the result itself is still exact.
    """
    std = _Standard(lp)
    B = _Basis(std)
    state = {"pivots": 0}
    hint_cols = None
    if float_guided and basis_hint is None and lp.n_rows:
        basis_hint = _float_basis_hint(lp)
    if basis_hint is not None:
        hint_cols = []
        for h in basis_hint:
            if isinstance(h, tuple) and h and h[0] == "slack":
                j = std.rowcol_of_row[h[1]]
                if j >= 0:
                    hint_cols.append(j)
            else:
                hint_cols.append(int(h))
    if hint_cols is None:
        # all-slack/artificial start
        start = []
        for i in range(std.m):
            j = std.slack_of_row[i]
            start.append(j if j >= 0 else std.art_of_row[i])
        B.set_basis(start)
    else:
        B.set_basis(hint_cols)
    # If the start is primal infeasible (possible with a hint), or artificials
    # carry value, run phase 1.
    xB = B.ftran({i: std.b[i] for i in range(std.m) if std.b[i] != 0})
    needs_phase1 = any(v < 0 for v in xB.values()) or any(
        std.is_artificial(j) and xB.get(i, ZERO) != 0 for i, j in enumerate(B.basis)
    )
    if needs_phase1 and hint_cols is not None and any(v < 0 for v in xB.values()):
        # negative basics cannot seed a primal phase; fall back to slack start
        start = []
        for i in range(std.m):
            j = std.slack_of_row[i]
            start.append(j if j >= 0 else std.art_of_row[i])
        B.set_basis(start)
        xB = B.ftran({i: std.b[i] for i in range(std.m) if std.b[i] != 0})
        needs_phase1 = any(
            std.is_artificial(j) and xB.get(i, ZERO) != 0 for i, j in enumerate(B.basis)
        )
    skip_art = set(range(std.n_real, len(std.cols)))
    if needs_phase1:
        costs1 = [ZERO] * len(std.cols)
        for j in range(std.n_real, len(std.cols)):
            costs1[j] = Rat(-1)
        status, xB = _simplex_phase(std, B, costs1, set(), pivot_limit, rule, state)
        if status == "gave_up":
            return LpOutcome("gave_up", pivots=state["pivots"])
        assert status == "optimal"
        infeas = sum(
            (xB.get(i, ZERO) for i, j in enumerate(B.basis) if std.is_artificial(j)),
            ZERO,
        )
        if infeas != 0:
            return LpOutcome("infeasible", pivots=state["pivots"])
    costs2 = list(std.c) + [ZERO] * (len(std.cols) - len(std.c))
    status, xB = _simplex_phase(std, B, costs2, skip_art, pivot_limit, rule, state)
    if status == "gave_up":
        return LpOutcome("gave_up", pivots=state["pivots"])
    if status == "unbounded":
        return LpOutcome("unbounded", pivots=state["pivots"])
    assignment = {}
    for i, j in enumerate(B.basis):
        v = xB.get(i, ZERO)
        if j < lp.n_vars and v != 0:
            assignment[lp.var_names[j]] = v
    value = lp.objective_value(assignment)
    if verify:
        bad = lp.check_assignment(assignment)
        if bad is not None:
            raise AssertionError(f"internal error: optimal basis violates row {bad}")
        _verify_optimality(std, B, costs2, skip_art)
    return LpOutcome("optimal", value=value, assignment=assignment, pivots=state["pivots"])


def _verify_optimality(std, B: _Basis, costs, skip):
    B.refactor()
    cB = {}
    for i, j in enumerate(B.basis):
        if costs[j] != 0:
            cB[i] = costs[j]
    y = B.btran(cB)
    basis_set = set(B.basis)
    for j in range(len(std.cols)):
        if j in basis_set or j in skip:
            continue
        red = costs[j] - sum((y.get(i, ZERO) * v for i, v in std.cols[j]), ZERO)
        assert red <= 0, "internal error: reduced cost positive at claimed optimum"


def _float_basis_hint(lp: LinearProgram):
    """The optimal basis of a floating-point HiGHS solve (statuses, not values).

    Returns a list of structural column indices and ("slack", row) markers;
    rows whose logical is basic on an equality get repaired with an artificial
    pinned at zero by the exact phase logic.
    """
    import numpy as np

    try:
        import scipy.optimize._highspy._core as core
    except ImportError:  # pragma: no cover - scipy always ships it
        return None

    n, m = lp.n_vars, lp.n_rows
    cost = np.zeros(n)
    sgn = -1.0 if lp.sense == "max" else 1.0
    for j, v in lp.objective.items():
        cost[j] = sgn * float(v)
    inf = core.kHighsInf
    lhs = np.empty(m)
    rhs = np.empty(m)
    cols = [[] for _ in range(n)]
    for i, (coeffs, rel, b) in enumerate(lp.rows):
        fb = float(b)
        lhs[i] = -inf if rel == "<=" else fb
        rhs[i] = inf if rel == ">=" else fb
        for j, v in coeffs.items():
            cols[j].append((i, float(v)))
    start = [0]
    index = []
    value = []
    for j in range(n):
        for i, v in cols[j]:
            index.append(i)
            value.append(v)
        start.append(len(index))
    hlp = core.HighsLp()
    hlp.num_col_ = n
    hlp.num_row_ = m
    hlp.col_cost_ = cost
    hlp.col_lower_ = np.zeros(n)
    hlp.col_upper_ = np.full(n, inf)
    hlp.row_lower_ = lhs
    hlp.row_upper_ = rhs
    hlp.a_matrix_.num_col_ = n
    hlp.a_matrix_.num_row_ = m
    hlp.a_matrix_.format_ = core.MatrixFormat.kColwise
    hlp.a_matrix_.start_ = np.array(start, dtype=np.int32)
    hlp.a_matrix_.index_ = np.array(index, dtype=np.int32)
    hlp.a_matrix_.value_ = np.array(value)
    solver = core._Highs()
    solver.setOptionValue("output_flag", False)
    if solver.passModel(hlp) != core.HighsStatus.kOk:
        return None
    if solver.run() != core.HighsStatus.kOk:
        return None
    if solver.getModelStatus() != core.HighsModelStatus.kOptimal:
        return None
    basis = solver.getBasis()
    kbasic = core.HighsBasisStatus.kBasic
    hint = [j for j in range(n) if basis.col_status[j] == kbasic]
    for i in range(m):
        if basis.row_status[i] == kbasic:
            hint.append(("slack", i))
    return hint
