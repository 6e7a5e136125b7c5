"""Command line front end.

    fracdtn certify  OPERATOR
    fracdtn fracpow  OPERATOR --s S --method {spectral,balakrishnan,extension,dtn,vertex0}
    fracdtn dtn      OPERATOR --s S --mesh N,T,gamma
    fracdtn study    CONFIG [--out DIR]
    fracdtn bessel   --lambda L --s S

OPERATOR is a .mtx / .csv path or ``builtin:NAME[:k=v,...]``.  Exit status is
0 on success, 1 on input errors, 2 when certification fails and 3 when an
extrapolation does not converge.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dtn import dtn_matrix
from .errors import ConvergenceError, FracDtnError, SectorialityError
from .extension import bessel_normalized, c_s, s_normal_derivative
from .io import ingest_operator, write_dense_csv
from .sectorial import DEFAULT_SCHEDULE, frac_power_vertex0
from .semigroup import frac_power_balakrishnan, frac_power_spectral
from .sobolev import GradedMesh

EXIT_OK, EXIT_INPUT, EXIT_CERTIFY, EXIT_CONVERGENCE = 0, 1, 2, 3
METHODS = ("spectral", "balakrishnan", "extension", "dtn", "vertex0")


def _vector_csv(v, out):
    out.write("index,re,im\n")
    for i, z in enumerate(np.asarray(v, dtype=complex)):
        out.write(f"{i},{float(z.real)!r},{float(z.imag)!r}\n")


def _parse_x(text, n):
    if text is None:
        return np.ones(n)
    vals = [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]
    if len(vals) != n:
        raise ValueError(f"--x has {len(vals)} entries, operator dimension is {n}")
    return np.array(vals)


def _parse_mesh(text, A, s):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--mesh expects N,T,gamma (T and gamma may be 'auto')")
    N = int(parts[0])
    T = None if parts[1].lower() == "auto" else float(parts[1])
    g = None if parts[2].lower() == "auto" else float(parts[2])
    return GradedMesh.for_operator(A, s, N, T=T, gamma=g)


def cmd_certify(args, out):
    A, model = ingest_operator(args.operator)
    out.write(f"n,{A.n}\nM,{A.M!r}\nmu,{A.mu!r}\ntheta,{A.theta!r}\n")
    return EXIT_OK


def cmd_fracpow(args, out):
    A, _ = ingest_operator(args.operator)
    x = _parse_x(args.x, A.n)
    s = args.s
    if args.method == "spectral":
        y = frac_power_spectral(A, s, x)
    elif args.method == "balakrishnan":
        y = frac_power_balakrishnan(A, s, x)
    elif args.method == "extension":
        y = s_normal_derivative(A, s, x) / c_s(s)
    elif args.method == "dtn":
        mesh = _parse_mesh(args.mesh, A, s)
        y = dtn_matrix(A, s, mesh) @ x / c_s(s)
    else:
        sched = tuple(int(v) for v in args.schedule.split(","))
        res = frac_power_vertex0(A, s, x, sched)
        out.write(f"# extrapolation gap {res.gap:.3e}\n")
        y = res.power_x
    out.write(f"# A**s x, s={s!r}, method={args.method}\n")
    _vector_csv(y, out)
    return EXIT_OK


def cmd_dtn(args, out):
    A, _ = ingest_operator(args.operator)
    mesh = _parse_mesh(args.mesh, A, args.s)
    D = dtn_matrix(A, args.s, mesh)
    ref = c_s(args.s) * frac_power_spectral(A, args.s, np.eye(A.n))
    err = np.linalg.norm(D - ref) / np.linalg.norm(ref)
    out.write(f"# discrete DtN matrix, s={args.s!r}, N={mesh.N}, T={mesh.T!r}, gamma={mesh.gamma!r}\n")
    out.write(f"# relative Frobenius error against c_s A**s: {err:.6e}\n")
    out.write(write_dense_csv(D if np.any(D.imag) else D.real))
    return EXIT_OK


def cmd_study(args, out):
    from .study import emit_profile, run_convergence_study

    text = Path(args.config).read_text()
    res = run_convergence_study(text)
    table = res.to_csv()
    if args.out is None:
        out.write(table)
        return EXIT_OK
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    (d / "convergence.csv").write_text(table)
    (d / "profile.csv").write_text(emit_profile(res.timings))
    written = ["convergence.csv", "profile.csv"]
    if not args.no_plot:
        from .plotting import plot_convergence

        plot_convergence(res.rows, d / "convergence.png", title=res.config.operator)
        written.append("convergence.png")
    out.write("wrote " + ", ".join(str(d / w) for w in written) + "\n")
    return EXIT_OK


def cmd_bessel(args, out):
    lam, s = args.lam, args.s
    T = args.T if args.T is not None else 10.0 / np.sqrt(lam)
    t = np.linspace(0.0, T, args.points)
    u = bessel_normalized(lam, s, t)
    out.write(f"# normalized s-harmonic profile, lambda={lam!r}, s={s!r}, c_s lambda**s={float(c_s(s) * lam**s)!r}\n")
    out.write("t,u\n")
    for ti, ui in zip(t, u):
        out.write(f"{float(ti)!r},{float(ui)!r}\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="fracdtn", description="Fractional powers of sectorial matrices "
                                "through the Dirichlet-to-Neumann map of the extension problem.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="certify sectoriality and print M, mu, theta")
    c.add_argument("operator")
    c.set_defaults(func=cmd_certify)

    f = sub.add_parser("fracpow", help="apply A**s to a vector")
    f.add_argument("operator")
    f.add_argument("--s", type=float, required=True)
    f.add_argument("--method", choices=METHODS, default="spectral")
    f.add_argument("--x", help="comma separated entries (default: all ones)")
    f.add_argument("--mesh", default="512,auto,auto", help="N,T,gamma for --method dtn")
    f.add_argument("--schedule", default=",".join(map(str, DEFAULT_SCHEDULE)),
                   help="regularization schedule for --method vertex0")
    f.set_defaults(func=cmd_fracpow)

    d = sub.add_parser("dtn", help="discrete Dirichlet-to-Neumann matrix")
    d.add_argument("operator")
    d.add_argument("--s", type=float, required=True)
    d.add_argument("--mesh", default="512,auto,auto", help="N,T,gamma; T and gamma accept 'auto'")
    d.set_defaults(func=cmd_dtn)

    st = sub.add_parser("study", help="run a convergence study from a config file")
    st.add_argument("config")
    st.add_argument("--out", help="directory for convergence.csv, profile.csv and convergence.png")
    st.add_argument("--no-plot", action="store_true")
    st.set_defaults(func=cmd_study)

    b = sub.add_parser("bessel", help="tabulate the scalar extension profile")
    b.add_argument("--lambda", dest="lam", type=float, required=True)
    b.add_argument("--s", type=float, required=True)
    b.add_argument("--T", type=float)
    b.add_argument("--points", type=int, default=101)
    b.set_defaults(func=cmd_bessel)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except SectorialityError as exc:
        print(f"certification failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFY
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (FracDtnError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
