"""Command-line front end: generate, cluster, eval, verify, bench and sweep.

Machine-readable output (CSV with a header row) goes to stdout or to the
named files; messages go to stderr. Exit status: 0 success, 1 usage
error, 2 bad data or a failed check, 3 an internal guard (oracle size
limit, eigen-solver non-convergence).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (ExperimentGrid, RecoveryRow, ScalingRow, run_recovery_sweep,
                    run_scaling_bench, write_rows)
from .graph import (DegenerateGraphError, GraphConfig, PointSet, SimilarityMatrix, build_graph,
                    load_edge_list, load_points_csv, write_edge_list)
from .metrics import exact_recovery, ncut, nmi
from .oracle import (ConvergenceError, OracleSizeError, ideal_split, lemma1_check,
                     stopping_time_estimate, theorem1_bound_check, theorem2_bound_check)
from .rard import RardConfig, rard_cluster

__all__ = ["SweepResult", "SweepRow", "main", "read_labels", "sweep_eps0", "write_labels"]

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


# ---------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepRow:
    eps0: float
    clusters: int
    ncut: float
    seed: int
    recommended: bool = False


@dataclass
class SweepResult:
    rows: list[SweepRow]
    recommended: float | None


def sweep_eps0(graph: SimilarityMatrix, ladder, cfg: RardConfig = RardConfig()) -> SweepResult:
    """Cluster once per tolerance and pick the first one where ``k`` settles.

    ``ladder`` must be strictly decreasing. The recommended tolerance is
    the first rung of the first pair of consecutive rungs that yield the
    same cluster count; there is none if no such pair exists. ``eps_min``
    follows each rung at its default ratio.
    """
    ladder = [float(e) for e in ladder]
    if not ladder or any(e <= 0 for e in ladder):
        raise ValueError("ladder must be non-empty and positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    rows = []
    for e in ladder:
        _, labels = rard_cluster(graph, replace(cfg, eps0=e, eps_min=None))
        rows.append(SweepRow(e, labels.k, ncut(graph, labels), cfg.seed))
    rec = None
    for i in range(len(rows) - 1):
        if rows[i].clusters == rows[i + 1].clusters:
            rec = rows[i].eps0
            rows[i] = replace(rows[i], recommended=True)
            break
    return SweepResult(rows, rec)


def default_ladder(eps0: float, rungs: int = 12) -> list[float]:
    return [eps0 / 2**i for i in range(rungs)]


# ---------------------------------------------------------------- file helpers

def read_labels(path) -> np.ndarray:
    """One integer label per line; blank lines and ``#`` comments ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                out.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    return np.array(out, dtype=np.int64)


def write_labels(labels, path) -> None:
    lab = np.asarray(getattr(labels, "labels", labels), dtype=np.int64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{int(v)}\n" for v in lab)


def _labels_path(out: str) -> Path:
    return Path(out).with_suffix(".labels")


def _write_points(points: PointSet, path) -> None:
    np.savetxt(path, points.points, delimiter=",", fmt="%.17g")


def _csv_out(text: str, dest) -> None:
    if dest and dest != "-":
        Path(dest).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _csv_line(header: list[str], values: list) -> str:
    return ",".join(header) + "\n" + ",".join("" if v is None else str(v) for v in values) + "\n"


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _add_rard(p):
    g = p.add_argument_group("clustering")
    g.add_argument("--eps0", type=float, default=1e-3, help="initial step-change tolerance")
    g.add_argument("--eps-min", type=float, default=None, help="tolerance floor (default eps0/1024)")
    g.add_argument("--t-max", type=int, default=2000, help="iteration cap per recursive call")
    g.add_argument("--b", type=float, default=1.0, help="agents start uniform on [0, b)")
    g.add_argument("--alpha", type=float, default=1.0, help="lazy-walk step size")
    g.add_argument("--seed", type=int, default=0)


def _add_graph(p):
    g = p.add_argument_group("input graph")
    g.add_argument("--input", required=True, help="points .csv or edge list")
    g.add_argument("--format", choices=("auto", "points", "edges"), default="auto",
                   help="input kind; auto picks points for .csv, edges otherwise")
    g.add_argument("--label-col", choices=("last",), default=None,
                   help="points CSV carries labels in its last column")
    g.add_argument("--graph", choices=("gaussian", "pnn", "eps"), default="pnn")
    g.add_argument("--sigma", type=float, default=1.0, help="Gaussian width")
    g.add_argument("--delta", type=float, default=float("inf"), help="Gaussian distance cutoff")
    g.add_argument("--p", type=int, default=4, help="neighbour count for pnn")
    g.add_argument("--epsilon", type=float, default=None, help="radius for eps graphs")


def _build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="mixclust", description="Eigenvector-free spectral clustering by graph mixing.")
    top.add_argument("--version", action="store_true", help="print version and build info")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", default=None, help="file of 'key = value' defaults")
        return p

    p = cmd("generate", "write a synthetic dataset")
    p.add_argument("--dataset", choices=("sbm", "gauss5", "crescents", "ellipses", "rings"),
                   required=True)
    p.add_argument("--n", type=int, default=1500, help="SBM vertex count")
    p.add_argument("--k", type=int, default=5, help="SBM block count")
    p.add_argument("--p", type=float, default=0.5, help="SBM in-block edge probability")
    p.add_argument("--q", type=float, default=0.01, help="SBM cross-block edge probability")
    p.add_argument("--n-total", type=int, default=None, help="points for crescents/ellipses")
    p.add_argument("--n-per-ring", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="edge list (sbm) or points CSV; labels go next to it")

    p = cmd("cluster", "cluster a graph or point set")
    _add_graph(p)
    _add_rard(p)
    p.add_argument("--labels", default=None, help="ground-truth labels, enables scoring")
    p.add_argument("--out", default=None, help="predicted labels, one per line")
    p.add_argument("--tree", default=None, help="split tree as JSON")
    p.add_argument("--trace", default=None, help="per-step mixing trace as CSV")

    p = cmd("eval", "score predicted labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--graph", default=None, help="edge list for NCut")

    p = cmd("verify", "check the convergence bounds with the dense oracle")
    p.add_argument("--check", choices=("all", "lemma1", "theorem1", "theorem2"), default="all")
    p.add_argument("--input", default=None, help="edge list to check instead of built-in instances")
    p.add_argument("--labels", default=None, help="block labels for --input")
    p.add_argument("--instances", type=int, default=20, help="random instances per check")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--t-max", type=int, default=None, help="last t (default 50 ideal, 30 perturbed)")
    p.add_argument("--xi", type=float, default=1e-3, help="target for the stopping-time estimate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV destination (default stdout)")

    p = cmd("bench", "recovery and scaling experiments on SBMs")
    p.add_argument("mode", choices=("recovery", "scaling"))
    p.add_argument("--n", type=_int_list, default=[1500], help="comma-separated vertex counts")
    p.add_argument("--k", type=_int_list, default=[5], help="comma-separated block counts")
    p.add_argument("--q", type=_float_list, default=[0.01], help="comma-separated cross probabilities")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--reps", type=int, default=None, help="default 50 (recovery) or 5 (scaling)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    _add_rard(p)

    p = cmd("sweep", "cluster over a ladder of tolerances and recommend one")
    _add_graph(p)
    _add_rard(p)
    p.add_argument("--ladder", type=_float_list, default=None,
                   help="strictly decreasing tolerances (default: eps0 halved over --rungs)")
    p.add_argument("--rungs", type=int, default=12)
    p.add_argument("--out", default=None)
    return top


def _apply_config(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser, path: str):
    """Install ``key = value`` lines from ``path`` as defaults of ``sub``."""
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in actions:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        act = actions[dest]
        try:
            if act.choices is not None and val not in act.choices:
                raise ValueError(f"must be one of {sorted(act.choices)}")
            defaults[dest] = act.type(val) if act.type else val
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    sub.set_defaults(**defaults)
    for act in sub._actions:
        # a required option satisfied by the file is no longer required
        if act.dest in defaults:
            act.required = False


def _config_path(argv):
    # found before the real parse so file values can satisfy required options
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _parse(argv):
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    cmds = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in cmds), None)
    if path is not None and command is not None:
        _apply_config(parser, cmds[command], path)
    return parser, parser.parse_args(argv)


# ---------------------------------------------------------------- commands

def _rard_cfg(args) -> RardConfig:
    return RardConfig(eps0=args.eps0, eps_min=args.eps_min, t_max=args.t_max, b=args.b,
                      alpha=args.alpha, seed=args.seed)


def _load_input(args) -> tuple[SimilarityMatrix, np.ndarray | None]:
    kind = args.format
    if kind == "auto":
        kind = "points" if args.input.lower().endswith(".csv") else "edges"
    if kind == "edges":
        return load_edge_list(args.input), None
    pts = load_points_csv(args.input, args.label_col)
    gkind = {"gaussian": "gaussian", "pnn": "pnn", "eps": "epsilon"}[args.graph]
    cfg = GraphConfig(kind=gkind, sigma=args.sigma, delta=args.delta, p=args.p,
                      epsilon=args.epsilon)
    return build_graph(pts, cfg), pts.labels


def _cmd_generate(args) -> int:
    from . import synth

    labels_path = _labels_path(args.out)
    if args.dataset == "sbm":
        graph, labels = synth.generate_sbm(synth.SbmParams(args.n, args.k, args.p, args.q, args.seed))
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"# sbm n={args.n} k={args.k} p={args.p!r} q={args.q!r} seed={args.seed}\n")
            write_edge_list(graph, fh)
        n = graph.n
    else:
        if args.dataset == "gauss5":
            pts = synth.generate_gaussian_mixture(synth.GaussianMixtureSpec(seed=args.seed))
        elif args.dataset == "crescents":
            pts = synth.generate_two_crescents(args.n_total or 384, args.seed)
        elif args.dataset == "ellipses":
            pts = synth.generate_half_ellipses(args.n_total or 2000, args.seed)
        else:
            pts = synth.generate_concentric_rings(args.n_per_ring, seed=args.seed)
        _write_points(pts, args.out)
        labels, n = pts.labels, pts.n
    write_labels(labels, labels_path)
    sys.stdout.write(_csv_line(["dataset", "n", "seed", "out", "labels"],
                               [args.dataset, n, args.seed, args.out, labels_path]))
    return EXIT_OK


def _cmd_cluster(args) -> int:
    graph, file_labels = _load_input(args)
    truth = read_labels(args.labels) if args.labels else file_labels
    trace = [] if args.trace else None
    t0 = time.perf_counter()
    tree, pred = rard_cluster(graph, _rard_cfg(args), trace=trace)
    secs = time.perf_counter() - t0
    tree.validate()
    if args.out:
        write_labels(pred, args.out)
    if args.tree:
        doc = tree.root.to_dict()
        doc.update(seed=args.seed, n=graph.n)
        Path(args.tree).write_text(json.dumps(doc) + "\n", encoding="utf-8")
    if trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("seed,call,t,y,dy\n")
            for path, t, y, dy in trace:
                call = "/".join(map(str, path)) or "root"
                fh.write(f"{args.seed},{call},{t},{y!r},{'' if np.isnan(dy) else repr(dy)}\n")
    header = ["seed", "n", "clusters", "total_iterations", "seconds"]
    values = [args.seed, graph.n, pred.k, tree.total_iterations, f"{secs:.6f}"]
    if truth is not None:
        if truth.size != graph.n:
            raise ValueError(f"{truth.size} labels for {graph.n} vertices")
        header += ["nmi", "ncut", "recovered"]
        values += [f"{100 * nmi(pred, truth):.4f}", f"{ncut(graph, pred):.6g}",
                   int(exact_recovery(pred, truth))]
    sys.stdout.write(_csv_line(header, values))
    return EXIT_OK


def _cmd_eval(args) -> int:
    pred, truth = read_labels(args.pred), read_labels(args.truth)
    cut = None
    if args.graph:
        graph = load_edge_list(args.graph)
        cut = f"{ncut(graph, pred):.6g}"
    sys.stdout.write(_csv_line(["nmi", "ncut", "recovered"],
                               [f"{100 * nmi(pred, truth):.4f}", cut, int(exact_recovery(pred, truth))]))
    return EXIT_OK


def _simplex(rng, n):
    x = rng.random(n) + 1e-3
    return x / x.sum()


def _verify_instances(args):
    """Yield ``(check, name, graph, labels)`` for the requested checks."""
    from .matrices import TOY_BLOCKS, TWO_BLOCK_LABELS, toy_ideal_graph, two_block_graph
    from .synth import generate_weakly_coupled

    want = {"lemma1", "theorem1", "theorem2"} if args.check == "all" else {args.check}
    if args.input:
        if not args.labels:
            raise UsageError("verify --input needs --labels")
        graph, labels = load_edge_list(args.input), read_labels(args.labels)
        if labels.size != graph.n:
            raise ValueError(f"{labels.size} labels for {graph.n} vertices")
        for check in sorted(want):
            yield check, Path(args.input).name, graph, labels
        return
    cliques = np.zeros((10, 10))
    cliques[:5, :5] = cliques[5:, 5:] = 1.0
    np.fill_diagonal(cliques, 0.0)
    if "theorem1" in want:
        yield "theorem1", "two-cliques", SimilarityMatrix.from_dense(cliques), np.repeat([0, 1], 5)
        yield "theorem1", "toy-blocks", toy_ideal_graph(), TOY_BLOCKS
    for check in ("lemma1", "theorem2"):
        if check in want:
            yield check, "two-block", two_block_graph(), TWO_BLOCK_LABELS
            rng = np.random.default_rng(args.seed)
            for i in range(args.instances):
                n = int(rng.integers(6, 61))
                g, lab = generate_weakly_coupled(n, 0.05, seed=int(rng.integers(2**31)))
                yield check, f"coupled-{i}", g, lab


def _cmd_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    rows = ["check,instance,seed,t,lhs,rhs,holds"]
    failed = 0
    for check, name, graph, labels in _verify_instances(args):
        if check == "lemma1":
            dev = lemma1_check(ideal_split(graph, labels))
            ok = dev <= 1e-12
            rows.append(f"{check},{name},{args.seed},,{dev!r},1e-12,{int(ok)}")
            failed += not ok
            continue
        x0 = _simplex(rng, graph.n)
        if check == "theorem1":
            # W* equals the input for graphs that are already block-diagonal
            w_star = ideal_split(graph, labels).W_star
            series = theorem1_bound_check(w_star, labels, x0, args.alpha, range((args.t_max or 50) + 1))
        else:
            series = theorem2_bound_check(graph, labels, x0, args.alpha, range((args.t_max or 30) + 1))
            if not series.hypothesis_ok:
                print(f"verify: {name}: skipped, {series.note}", file=sys.stderr)
                continue
        for c in series:
            rows.append(f"{check},{name},{args.seed},{c.t},{c.lhs!r},{c.rhs!r},{int(c.holds)}")
            failed += not c.holds
        lam_next = series.lambdas[series.k] if series.lambdas.size > series.k else np.nan
        est = stopping_time_estimate(lam_next, args.alpha, series.ratio, args.xi)
        print(f"verify: {check} {name}: lambda_k+1={lam_next:.6g} ratio={series.ratio:.6g} "
              f"t >= {est:.4g} for xi={args.xi:g}", file=sys.stderr)
    _csv_out("\n".join(rows) + "\n", args.out)
    if failed:
        raise CheckFailed(f"{failed} bound evaluations failed")
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = _rard_cfg(args)
    if args.mode == "recovery":
        grid = ExperimentGrid(n=tuple(args.n), k=tuple(args.k), q=tuple(args.q), p=args.p,
                              reps=args.reps or 50, seed=args.seed)
        rows = run_recovery_sweep(grid, cfg, workers=args.workers)
        _csv_out(write_rows(rows, row_type=RecoveryRow), args.out)
        return EXIT_OK
    if len(args.k) != 1 or len(args.q) != 1:
        raise UsageError("bench scaling takes a single --k and --q")
    res = run_scaling_bench(args.n, args.k[0], args.p, args.q[0], cfg, reps=args.reps or 5,
                            seed=args.seed, workers=args.workers)
    _csv_out(write_rows(res.rows, row_type=ScalingRow), args.out)
    med = ", ".join(f"n={n}: {m:.4g}s" for n, m in res.medians.items())
    print(f"bench: median seconds {med}; log-log slope {res.slope:.3f}", file=sys.stderr)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    graph, _ = _load_input(args)
    ladder = args.ladder or default_ladder(args.eps0, args.rungs)
    res = sweep_eps0(graph, ladder, _rard_cfg(args))
    _csv_out(write_rows(res.rows, row_type=SweepRow), args.out)
    if res.recommended is None:
        print("sweep: no recommendation (cluster count never repeated)", file=sys.stderr)
    else:
        print(f"sweep: recommended eps0 = {res.recommended!r}", file=sys.stderr)
    return EXIT_OK


def _version() -> str:
    import numba
    import scipy

    return (f"mixclust {__version__} (python {sys.version.split()[0]}, numpy {np.__version__}, "
            f"scipy {scipy.__version__}, numba {numba.__version__})")


_COMMANDS = {"generate": _cmd_generate, "cluster": _cmd_cluster, "eval": _cmd_eval,
             "verify": _cmd_verify, "bench": _cmd_bench, "sweep": _cmd_sweep}


def main(argv=None) -> int:
    try:
        _, args = _parse(argv)
        if args.version:
            print(_version())
            return EXIT_OK
        if not args.command:
            raise UsageError("mixclust: a subcommand is required (try --help)")
        return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OracleSizeError, ConvergenceError) as exc:
        print(f"mixclust: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except CheckFailed as exc:
        print(f"mixclust: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError, DegenerateGraphError) as exc:
        print(f"mixclust: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
