"""Command-line surface: orbit listings, gadget construction, verification,
the hardness curve, lifting/leakage, and LP interchange.

All outputs are deterministic; files are written atomically; the process
exits 0 only on success/acceptance.
"""

import json
import os
import sys
import tempfile
from pathlib import Path

import click

from . import fixtures, orbits
from .boolfn import BoolFn
from .gadget import (
    Gadget,
    completeness,
    lift_gadget,
    parse_gadget,
    serialize_gadget,
    true_soundness_bruteforce,
)
from .orbits import edge_orbits, group_context, placement_classes
from .rational import Rat, ceil_decimals, format_rat, rat
from .verify import serialize_witness, parse_witness, verify as run_verify

__all__ = ["main", "atomic_write"]


def atomic_write(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


@click.group()
def main():
    """Exact-rational gadget construction and verification."""


@main.command("orbits")
@click.option("--k", type=int, required=True)
@click.option("--placements", is_flag=True, help="list placement classes instead of edges")
@click.option("--paper-forms", is_flag=True, help="also canonicalize the published table rows")
def orbits_cmd(k, placements, paper_forms):
    """One line per orbit: <f1> <f2> <raw-hamming> <size> (or placement classes)."""
    if placements:
        for rep, size, _w in placement_classes(k):
            click.echo(f"{BoolFn(k, rep)} {size}")
        return
    for e in edge_orbits(k):
        click.echo(f"{BoolFn(k, e.hi)} {BoolFn(k, e.lo)} {e.ham} {e.size}")
    if paper_forms:
        rows = {2: fixtures.PUBLISHED_ORBITS_K2, 3: fixtures.PUBLISHED_ORBITS_K3,
                4: fixtures.PUBLISHED_ORBITS_K4}.get(k, [])
        for s1, s2, ham, size in rows:
            oid = fixtures.orbit_id_of_pair(k, s1, s2)
            e = edge_orbits(k)[oid]
            click.echo(
                f"# published {s1} {s2} -> canonical {BoolFn(k, e.hi)} {BoolFn(k, e.lo)}"
                f" ham {e.ham} size {e.size}"
            )


@main.command()
@click.option("--k", type=int, required=True)
@click.option("--completeness", "completeness_", required=True, help="target completeness p/q")
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), default="rs")
@click.option("--restrict", "restrict_file", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), required=True)
@click.option("--witness", "witness_out", type=click.Path(), default=None)
def construct(k, completeness_, mode, restrict_file, out, witness_out):
    """Best gadget at the given completeness; writes gadget and witness files."""
    from .soundness import construct_gadget

    restriction = None
    if restrict_file:
        restriction = _read_restriction(restrict_file, k)
    g, wit, s = construct_gadget(k, rat(completeness_), mode, restriction=restriction)
    atomic_write(out, serialize_gadget(g))
    if witness_out:
        atomic_write(witness_out, serialize_witness(g, wit))
    click.echo(f"completeness {format_rat(completeness(g))}")
    click.echo(f"{mode} {format_rat(s)}")


def _read_restriction(path, k):
    ids = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        s1, s2 = line.split()
        ids.append(fixtures.orbit_id_of_pair(k, s1, s2))
    return sorted(set(ids))


@main.command()
@click.option("--k", type=int, required=True)
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), default="rs")
@click.option("--out", type=click.Path(), default=None)
@click.option("--witness", "witness_out", type=click.Path(), default=None)
def extremal(k, mode, out, witness_out):
    """Minimal-completeness gadget maximizing (1-s)/(1-c)."""
    from .soundness import min_completeness_extremal_gadget

    g, wit, s, ratio = min_completeness_extremal_gadget(k, mode)
    if out:
        atomic_write(out, serialize_gadget(g))
    if witness_out:
        atomic_write(witness_out, serialize_witness(g, wit))
    click.echo(f"completeness {format_rat(completeness(g))}")
    click.echo(f"{mode} {format_rat(s)}")
    click.echo(f"ratio {format_rat(ratio)}")


@main.command("verify")
@click.option("--gadget", "gadget_file", type=click.Path(exists=True), required=True)
@click.option("--witness", "witness_file", type=click.Path(exists=True), required=True)
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), required=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def verify_cmd(gadget_file, witness_file, mode, fmt):
    """Five-step verification; exit code 0 only on acceptance."""
    report = run_verify(
        Path(gadget_file).read_text(), Path(witness_file).read_text(), mode
    )
    if fmt == "json":
        payload = {
            "steps": [
                {"step": s.step, "ok": s.ok, "detail": s.detail} for s in report.steps
            ],
            "completeness": format_rat(report.completeness)
            if report.completeness is not None
            else None,
            "soundness": format_rat(report.soundness)
            if report.soundness is not None
            else None,
            "mode": report.mode,
            "accepted": report.accepted,
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        for line in report.lines():
            click.echo(line)
    if not report.accepted:
        sys.exit(1)


@main.command()
@click.option("--k", type=int, default=4)
@click.option("--step", default=None, help="grid spacing p/q (default 1/512)")
@click.option("--points", default=None, help="comma-separated explicit completeness values")
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), default="rsinf")
@click.option("--out", type=click.Path(), required=True)
def curve(k, step, points, mode, out):
    """CSV of the hardness curve: c_exact,s_exact,c_decimal,s_decimal_roundup4."""
    from .soundness import curve as curve_fn

    pts = [rat(p) for p in points.split(",")] if points else None
    rows = curve_fn(k, step=rat(step) if step else None, points=pts, mode=mode)
    lines = ["c_exact,s_exact,c_decimal,s_decimal_roundup4"]
    for c, s in rows:
        lines.append(
            f"{format_rat(c)},{format_rat(s)},{float(c):.6f},{ceil_decimals(s, 4)}"
        )
    atomic_write(out, "\n".join(lines) + "\n")
    click.echo(f"wrote {len(rows)} rows to {out}")


@main.command()
@click.option("--gadget", "gadget_file", type=click.Path(exists=True), required=True)
@click.option("--to-k", "kp", type=int, required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--measure-leak", is_flag=True)
@click.option("--witness", "witness_file", type=click.Path(exists=True), default=None)
def lift(gadget_file, kp, out, measure_leak, witness_file):
    """Full lift of a gadget to arity k'; optionally measure lifted leakage."""
    g = parse_gadget(Path(gadget_file).read_text())
    lifted = lift_gadget(g, kp)
    if out:
        atomic_write(out, serialize_gadget(lifted))
    click.echo(f"completeness {format_rat(completeness(lifted))}")
    if measure_leak:
        from .soundness import measure_leakage, infinity_relaxed_soundness

        if witness_file:
            wit = _witness_from_file(g, Path(witness_file).read_text())
        else:
            _v, wit = infinity_relaxed_soundness(g)
        res = measure_leakage(g, wit, kp)
        if isinstance(res, dict):
            click.echo(
                f"leakage estimate {float(res['mean']):.6g} +- {res['stddev_float']:.2g}"
                f" over {res['samples']} samples"
            )
        else:
            click.echo(f"leakage {format_rat(res)}")


def _witness_from_file(g, text):
    from .soundness import GadgetFlowWitness
    from .support import SupportSystem

    k, mode, blocks = parse_witness(text)
    system = SupportSystem(g.k, [o for o, _ in g.weights])
    flows = {}
    import numpy as np

    for ci in range(system.n_classes):
        rep = system.class_list[ci][0]
        if rep not in blocks:
            continue
        cd = system.class_data(ci)
        cd.ensure_pair_labels()
        vals = [Rat(0)] * cd.n_pair_orbits
        for (u, v, x) in blocks[rep]:
            key = u * system.ctx.N + v
            pos = int(np.searchsorted(system.sorted_keys, key))
            t = int(cd.pair_labels[system.order[pos]])
            vals[t] = vals[t] + x
        flows[ci] = vals
    return GadgetFlowWitness(g.k, mode, system.orbit_ids, flows, None)


@main.command("true-soundness")
@click.option("--gadget", "gadget_file", type=click.Path(exists=True), required=True)
def true_soundness(gadget_file):
    """Exact brute-force soundness (k = 2 only)."""
    g = parse_gadget(Path(gadget_file).read_text())
    click.echo(f"s {format_rat(true_soundness_bruteforce(g))}")


@main.command("export-lp")
@click.option("--k", type=int, required=True)
@click.option("--completeness", "completeness_", required=True)
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), default="rs")
@click.option("--out", type=click.Path(), required=True)
def export_lp_cmd(k, completeness_, mode, out):
    """Integer-scaled LP text export of the compressed construction LP."""
    from .construction import build_construction_lp
    from .lpio import export_lp

    clp = build_construction_lp(k, rat(completeness_), mode)
    atomic_write(out, export_lp(clp.lp))
    r, v, z = clp.lp.stats()
    click.echo(f"constraints {r} variables {v} nonzeros {z}")


@main.command("lp-sizes")
@click.option("--k", type=int, required=True)
@click.option("--mode", type=click.Choice(["rs", "rsinf"]), default="rs")
def lp_sizes(k, mode):
    """Size report of the compressed construction LP (see convention notes)."""
    from .construction import build_construction_lp, size_report

    clp = build_construction_lp(k, Rat(1, 2), mode)
    for line in size_report(clp):
        click.echo(line)


if __name__ == "__main__":
    main()
