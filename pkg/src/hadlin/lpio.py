"""LP text interchange: export with integer-cleared rows, exact re-import.

The export scales every row (and the objective) by the LCM of its
denominators so standard LP text holds the system exactly; solutions coming
back from an external solver are accepted only after exact substitution.
"""

from math import gcd

from .rational import Rat, ZERO, format_rat, rat
from .simplex import LinearProgram

__all__ = ["export_lp", "import_solution", "scaled_rows"]


def _rowscale(coeffs, rhs):
    denom = int(Rat(rhs).denominator)
    for c in coeffs.values():
        d = int(Rat(c).denominator)
        denom = denom * d // gcd(denom, d)
    return denom


def scaled_rows(lp: LinearProgram):
    """Rows with integer coefficients and unchanged feasible set."""
    out = []
    for coeffs, rel, rhs in lp.rows:
        m = _rowscale(coeffs, rhs)
        out.append(
            (
                {j: int(c * m) for j, c in coeffs.items()},
                rel,
                int(Rat(rhs) * m),
            )
        )
    return out


def export_lp(lp: LinearProgram, destination=None) -> str:
    """CPLEX-LP-style text with integer coefficients row by row."""
    lines = ["\\ exact integer-scaled export"]
    lines.append("Maximize" if lp.sense == "max" else "Minimize")
    m = 1
    for c in lp.objective.values():
        d = int(Rat(c).denominator)
        m = m * d // gcd(m, d)
    terms = [
        f"{'+' if int(c * m) >= 0 else '-'} {abs(int(c * m))} {lp.var_names[j]}"
        for j, c in sorted(lp.objective.items())
    ]
    lines.append(" obj: " + (" ".join(terms) if terms else "0 " + (lp.var_names[0] if lp.var_names else "x")))
    lines.append("Subject To")
    for i, (coeffs, rel, rhs) in enumerate(scaled_rows(lp)):
        terms = [
            f"{'+' if c >= 0 else '-'} {abs(c)} {lp.var_names[j]}"
            for j, c in sorted(coeffs.items())
        ]
        op = {"<=": "<=", ">=": ">=", "=": "="}[rel]
        lines.append(f" r{i}: " + " ".join(terms) + f" {op} {rhs}")
    lines.append("Bounds")
    for name in lp.var_names:
        lines.append(f" 0 <= {name}")
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if destination is not None:
        from .cli import atomic_write

        atomic_write(destination, text)
    return text


def import_solution(lp: LinearProgram, source: str) -> dict:
    """Parse '<variable> <p>/<q>' lines and validate by exact substitution."""
    assignment = {}
    for lineno, rawline in enumerate(source.splitlines(), 1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<variable> <p>/<q>'")
        name, val = parts
        if name not in lp._var_index:
            raise ValueError(f"line {lineno}: unknown variable {name!r}")
        assignment[name] = rat(val)
    bad = lp.check_assignment(assignment)
    if bad == -1:
        raise ValueError("solution rejected: negative variable value")
    if bad is not None:
        coeffs, rel, rhs = lp.rows[bad]
        raise ValueError(f"solution rejected: row r{bad} ({rel} {format_rat(rhs)}) violated")
    return assignment
