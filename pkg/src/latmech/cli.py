"""Command-line front end: ``latmech generate | solve | verify``.

Exit codes: 0 success, 1 bad input, 2 solve finished without converging
(results are still written).
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import os
import sys

import numpy as np

from . import io
from .constitutive import KTILDE_MODES, MIDPOINT, Regime, ktilde_entry
from .driver import SolveOptions, solve_nonlinear
from .lattice import B1, B2, LatticeSpec, build_bcc_lattice
from .linear_system import BoundaryError
from .verify import compare, random_graph, random_mask

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2

log = logging.getLogger("latmech")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _cells(text: str) -> tuple[int, int, int]:
    try:
        parts = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected nx,ny,nz integers, got {text!r}")
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"cells must be three integers >= 1, got {text!r}")
    return parts


def _law(text: str) -> dict:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("law must be six numbers x0,x1,x2,x3,f0,f1")
    if len(vals) != 6:
        raise argparse.ArgumentTypeError("law must be six numbers x0,x1,x2,x3,f0,f1")
    return dict(zip(io.LAW_KEYS, vals))


def _thread_limit():
    limit = os.environ.get("LATMECH_THREADS")
    if not limit:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(limit))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="latmech", description="Site-bond lattice mechanics with elastic, plastic and damage bonds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a BCC site-bond lattice mesh")
    g.add_argument("--cells", type=_cells, required=True, metavar="NX,NY,NZ")
    size = g.add_mutually_exclusive_group(required=True)
    size.add_argument("--size-a", type=float, help="quarter-diagonal unit a (S = sqrt(8) a)")
    size.add_argument("--size-S", type=float, help="cubic cell size S")
    size.add_argument("--grain-volume", type=float, help="average grain volume V (S = (2V)^(1/3))")
    size.add_argument("--triple-line", type=float, help="triple-line length (a = L_TL)")
    g.add_argument("--law", type=_law, help="bond law x0,x1,x2,x3,f0,f1 for every bond")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run a displacement-controlled solve")
    s.add_argument("--mesh", required=True)
    s.add_argument("--bc", required=True)
    s.add_argument("--steps", type=int, default=1)
    s.add_argument("--mode", choices=KTILDE_MODES, default=MIDPOINT)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--theta", type=float, default=1e-8)
    s.add_argument("--tol", type=float, help="elongation tolerance (default 1e-10 * min |b|)")
    s.add_argument("--max-iters", type=int, default=50)
    s.add_argument("--out", required=True)
    s.add_argument("--dump-plot-data", action="store_true", help="also write per-step steps.csv")

    v = sub.add_parser("verify", help="compare the sparse engine against the dense oracle")
    v.add_argument("--mesh")
    v.add_argument("--bc")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--nodes", type=int, default=30, help="random graph size when no mesh is given")
    return parser


def cmd_generate(args) -> int:
    nx, ny, nz = args.cells
    spec = LatticeSpec(
        nx, ny, nz,
        cell_size=args.size_S,
        quarter_diagonal=args.size_a,
        grain_volume=args.grain_volume,
        triple_line=args.triple_line,
    )
    graph = build_bcc_lattice(spec)
    io.write_mesh(args.out, io.mesh_document(graph, law=args.law))
    fam = graph.families
    print(f"nodes {graph.n} edges {graph.m} (B1 {int((fam == B1).sum())}, B2 {int((fam == B2).sum())})")
    print(f"L1 {spec.L1:.17g} L2 {spec.L2:.17g}")
    return EXIT_OK


def cmd_solve(args) -> int:
    graph, params = io.read_mesh(args.mesh)
    mask = io.read_boundary(args.bc, graph.n)
    opts = SolveOptions(
        max_regime_iters=args.max_iters,
        tol_e=args.tol,
        mode=args.mode,
        epsilon=args.epsilon,
        theta=args.theta,
        load_steps=args.steps,
    )
    result = solve_nonlinear(graph, params, mask, opts)
    io.write_results(args.out, graph, result, plot_data=args.dump_plot_data)
    dmg = result.damage()
    print(
        f"steps {len(result.steps)} converged {result.converged} "
        f"failed {dmg['failed_count']} softening {dmg['softening_count']} "
        f"stiffness remaining {dmg['stiffness_remaining']:.6g}"
    )
    return EXIT_OK if result.converged else EXIT_NONCONVERGED


def cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    checks = []
    if args.mesh or args.bc:
        if not (args.mesh and args.bc):
            raise io.DocumentError("verify needs both --mesh and --bc, or neither")
        graph, params = io.read_mesh(args.mesh)
        mask = io.read_boundary(args.bc, graph.n)
        result = solve_nonlinear(graph, params, mask)
        checks.append(("converged solve", graph, result.mask, result.final.ktilde))
    else:
        graph = random_graph(args.nodes, args.seed)
        mask = random_mask(graph.n, args.seed)
        params = None
    if params is None:
        k = rng.uniform(0.1, 2.0, size=graph.m)
    else:
        regimes = rng.integers(0, len(Regime), size=graph.m)
        k = np.abs(ktilde_entry(regimes, params, MIDPOINT, 1e-9).value)
    checks.append((f"seeded stiffness (seed {args.seed})", graph, mask, k))

    ok = True
    for name, g, mk, kt in checks:
        rep = compare(g, mk, kt)
        print(f"[{name}] n={g.n} m={g.m}")
        for line in rep.lines():
            print(f"  {line}")
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_INPUT


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help; hand back the code
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    handler = {"generate": cmd_generate, "solve": cmd_solve, "verify": cmd_verify}[args.command]
    try:
        with _thread_limit():
            return handler(args)
    except (io.DocumentError, BoundaryError, ValueError, OSError) as exc:
        print(f"latmech {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
