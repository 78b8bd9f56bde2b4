"""Command-line front end: ``siacline {solve,filter,study,slices,contours,counts}``."""

import argparse
import csv
import re
import sys
from pathlib import Path

from .dg import FieldFormatError, UniformMesh2D, load_field, project_initial, save_field, solve_advection
from .filtering import FilterConfig, FilterConfigError, filter_field
from .harness import (
    CFL,
    INITIAL_CONDITIONS,
    TFINAL,
    exact_solution,
    initial_condition,
    parse_filters,
    parse_int_list,
    parse_number,
    read_config,
    run_contours,
    run_convergence_study,
    run_counts_timing,
    run_slices,
    write_cost_csv,
    write_grid_csv,
)


def _pair(text, conv, what):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"{what} must look like A,B; got {text!r}")
    try:
        return tuple(conv(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _number(text):
    try:
        return parse_number(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sampling(text):
    if text == "errgrid":
        return "error_grid"
    if text.startswith("uniform:"):
        nx, ny = _pair(text[len("uniform:"):], int, "uniform sampling")
        if nx < 1 or ny < 1:
            raise argparse.ArgumentTypeError("sample counts must be positive")
        return ("uniform", nx, ny)
    raise argparse.ArgumentTypeError(f"sampling must be errgrid or uniform:NX,NY; got {text!r}")


def cmd_solve(args):
    mesh = UniformMesh2D(args.nx, args.ny)
    u0 = initial_condition(args.ic)
    uh = solve_advection(project_initial(mesh, args.k, u0), args.tfinal, cfl=args.cfl)
    save_field(uh, args.out)
    print(f"wrote {args.out}  (k={args.k}, {args.nx}x{args.ny}, T={args.tfinal:g})")


def cmd_filter(args):
    uh = load_field(args.field)
    cfg = FilterConfig(args.kind, args.theta if args.kind == "line" else 0.0, args.mu)
    res = filter_field(uh, cfg, args.sampling)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        has_w = res.weights is not None
        w.writerow(["x", "y", "value"] + (["weight"] if has_w else []))
        cols = [res.x.ravel(), res.y.ravel(), res.values.ravel()]
        if has_w:
            cols.append(res.weights.ravel())
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
    c = res.counters
    print(f"{cfg.label()}: {res.values.size} samples, integrals={c.integrals}, "
          f"quadrature_evals={c.quadrature_evals}, intersection_scans={c.intersection_scans}")


def cmd_study(args):
    cfg = read_config(args.config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = run_convergence_study(cfg["ic"], cfg["ks"], cfg["Ns"], cfg["filters"],
                                   cfg["tfinal"], cfg["cfl"])
    path = out / "study.csv"
    report.write_csv(path)
    print(f"wrote {path} ({len(report.rows)} rows)")


def _cuts(text):
    return [c for c in re.split(r"[;,\s]+", text.strip()) if c]


def cmd_slices(args):
    uh = load_field(args.field)
    exact = exact_solution(args.ic, args.tfinal)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for prof in run_slices(uh, exact, parse_filters(args.filters), _cuts(args.cuts), args.samples):
        path = out / f"slice_{prof.cut.replace(':', '_')}.csv"
        prof.write_csv(path)
        print(f"wrote {path}")


def cmd_contours(args):
    uh = load_field(args.field)
    exact = exact_solution(args.ic, args.tfinal)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (X, Y, Z) in run_contours(uh, exact, parse_filters(args.filters), args.grid).items():
        path = out / f"contour_{name}.csv"
        write_grid_csv(path, X, Y, Z)
        print(f"wrote {path}")


def cmd_counts(args):
    filters = parse_filters(args.filters) if args.filters else None
    kw = {"filters": filters} if filters else {}
    rows = run_counts_timing(args.point, args.k, N=args.N, repeats=args.repeats, **kw)
    write_cost_csv(args.out, rows)
    for r in rows:
        print(f"k={r.k} {r.filter.label():<34} integrals={r.integrals:<5d} "
              f"quadrature_evals={r.quadrature_evals:<6d} seconds={r.seconds:.3e}")


def build_parser():
    p = argparse.ArgumentParser(prog="siacline", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve the advection test problem and save the DG field")
    s.add_argument("--ic", choices=sorted(INITIAL_CONDITIONS), default="sinxy")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--nx", type=int, required=True)
    s.add_argument("--ny", type=int, required=True)
    s.add_argument("--tfinal", type=_number, default=TFINAL)
    s.add_argument("--cfl", type=_number, default=CFL)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("filter", help="filter a saved field at sample points")
    f.add_argument("--field", required=True)
    f.add_argument("--kind", choices=["tensor", "line"], required=True)
    f.add_argument("--theta", type=_number, default=0.0)
    f.add_argument("--mu", type=_number, default=None)
    f.add_argument("--sampling", type=_sampling, default="errgrid")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_filter)

    st = sub.add_parser("study", help="convergence table from a key=value config file")
    st.add_argument("--config", required=True)
    st.add_argument("--out-dir", required=True)
    st.set_defaults(func=cmd_study)

    for name, func, help_ in (("slices", cmd_slices, "pointwise error along cuts"),
                              ("contours", cmd_contours, "log10 pointwise error on a grid")):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--field", required=True)
        c.add_argument("--filters", required=True, help="e.g. 'line:3pi/4:sqrt2;tensor:1'")
        if name == "slices":
            c.add_argument("--cuts", default="horizontal,vertical,diagonal")
            c.add_argument("--samples", type=int, default=1000)
        else:
            c.add_argument("--grid", type=lambda t: _pair(t, int, "grid"), required=True)
        c.add_argument("--ic", choices=sorted(INITIAL_CONDITIONS), default="sinxy",
                       help="initial condition used for the exact solution")
        c.add_argument("--tfinal", type=_number, default=TFINAL)
        c.add_argument("--out-dir", required=True)
        c.set_defaults(func=func)

    ct = sub.add_parser("counts", help="operation counts and single-point timing")
    ct.add_argument("--k", type=parse_int_list, required=True, help="degree or list, e.g. 1,2,3")
    ct.add_argument("--point", type=lambda t: _pair(t, _number, "point"), required=True)
    ct.add_argument("--filters", default=None)
    ct.add_argument("--N", type=int, default=20)
    ct.add_argument("--repeats", type=int, default=5)
    ct.add_argument("--out", required=True)
    ct.set_defaults(func=cmd_counts)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FieldFormatError, FilterConfigError, ValueError, OSError) as exc:
        print(f"siacline {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
