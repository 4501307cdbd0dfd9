"""Command-line front end.

Exit codes: 0 ok, 1 I/O error, 2 usage error, 3 validation/contract error,
4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from ._accel import set_threads
from .errors import ContractError, ValidationError, ZetaTmdError
from .graph import GraphDataset

log = logging.getLogger("zetatmd")

COMMANDS = ("gen", "label", "split", "transform", "wl", "dist", "xi", "mpnn", "bound", "cumacc")
_GLOBAL_WITH_VALUE = ("--threads", "--config")


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _nonneg_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {v}")
    return v


def _seed(text):
    v = _nonneg_int(text)
    if v >= 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetatmd", description="Tree mover's distances, WL tests and bounds on graphs.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--threads", type=_positive_int, help="worker threads for distance kernels")
    p.add_argument("--config", help="JSON file whose keys mirror the subcommand flags")
    p.add_argument("--quiet", action="store_true", help="no progress log on stderr")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    s = sub.add_parser("gen", help="generate a seeded synthetic dataset")
    s.add_argument("--model", required=True, help="er:p=P | ba:m=M | sbm:blocks=A:B,p_in=A:B,p_out=A:B")
    s.add_argument("--nodes", required=True, help="node count range LO:HI")
    s.add_argument("--count", type=_positive_int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("label", help="label graphs by cycle count against the median")
    s.add_argument("input")
    s.add_argument("--task", default="cycle-median", choices=["cycle-median"])
    s.add_argument("--mode", default="sub", choices=["sub", "hom", "basis"])
    s.add_argument("--lengths", type=_int_list, default=[3, 4])
    s.add_argument("--out", required=True)

    s = sub.add_parser("split", help="seeded train/test split")
    s.add_argument("input")
    s.add_argument("--frac", type=float, required=True, help="fraction going to the train part")
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--train-out", required=True)
    s.add_argument("--test-out", required=True)

    s = sub.add_parser("transform", help="apply a simulation transform to every graph")
    s.add_argument("input")
    s.add_argument("--zeta", required=True)
    s.add_argument("--out", required=True)

    s = sub.add_parser("wl", help="first 1-WL iteration separating two graphs")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--iters", type=_nonneg_int, required=True)
    s.add_argument("--zeta", default="identity")

    s = sub.add_parser("dist", help="pairwise distance matrix of a dataset")
    s.add_argument("input")
    s.add_argument("--depth", type=_positive_int, required=True)
    s.add_argument("--weight", default="const:1.0", help="const:W or levels:W2,W3,...")
    s.add_argument("--zeta", default="identity")
    s.add_argument("--out", required=True)

    s = sub.add_parser("xi", help="test-to-train structural similarity")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--depth", type=_positive_int, required=True)
    s.add_argument("--weight", default="const:1.0")
    s.add_argument("--zeta", default="identity")
    s.add_argument("--out", help="per-test minima CSV")

    s = sub.add_parser("mpnn", help="run the reference network (or just create weights)")
    s.add_argument("--weights", help="weight JSON to load")
    s.add_argument("--seed", type=_seed, help="generate random weights instead")
    s.add_argument("--arch", help="T,hidden[,mlp_depth] for generated weights")
    s.add_argument("--input-dim", type=_nonneg_int)
    s.add_argument("--classes", type=_positive_int, default=2)
    s.add_argument("--edge-dim", type=_nonneg_int)
    s.add_argument("--zeta", default="identity", help="transform applied to graphs before the forward pass")
    s.add_argument("--graphs")
    s.add_argument("--out", help="logits CSV")
    s.add_argument("--save-weights")
    s.add_argument("--margin", type=float, help="report the margin loss at this margin (needs labels)")
    s.add_argument("--correct-out", help="CSV of 0/1 correctness flags (needs labels)")

    s = sub.add_parser("bound", help="generalisation bound, optionally as a curve over distances")
    s.add_argument("--params", required=True, help="JSON with bound parameter fields")
    s.add_argument("--dist-file", help="per-test minima CSV (column min_distance or last)")
    s.add_argument("--weights", help="fill model-derived fields from this weight JSON")
    s.add_argument("--train", help="fill degree/feature/margin fields from this labelled dataset")
    s.add_argument("--zeta", default="identity", help="transform used with --train")
    s.add_argument("--fixed-encoder", action="store_true", help="classifier-only variant; distances are latent")
    s.add_argument("--out", required=True)

    s = sub.add_parser("cumacc", help="cumulative accuracy ordered by distance to the training set")
    s.add_argument("--dist", required=True)
    s.add_argument("--correct", required=True)
    s.add_argument("--out", required=True)
    return p


def _config_tokens(path) -> list:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: bad JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    tokens = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            tokens.append(flag)
        elif value is False or value is None:
            continue
        elif isinstance(value, list):
            tokens += [flag, ",".join(str(v) for v in value)]
        else:
            tokens += [flag, str(value)]
    return tokens


def _with_config(argv: list) -> list:
    """Insert config-file flags right after the subcommand; later command-line flags win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return argv
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _GLOBAL_WITH_VALUE:
            i += 2
            continue
        if tok in COMMANDS:
            return argv[: i + 1] + _config_tokens(known.config) + argv[i + 1:]
        i += 1
    return argv


# helpers ------------------------------------------------------------------------

def _load(path, num_classes=None) -> GraphDataset:
    from .io import parse_dataset

    ds = parse_dataset(path, num_classes=num_classes)
    log.info("read %d graphs from %s", len(ds), path)
    return ds


def _save(ds, path):
    from .io import serialize_dataset

    serialize_dataset(ds, path)
    log.info("wrote %d graphs to %s", len(ds), path)


def _single_graph(path):
    ds = _load(path)
    if len(ds) != 1:
        raise ValidationError(f"{path}: expected exactly one graph, found {len(ds)}")
    return ds[0]


def _zeta(text):
    from .transforms import ZetaSpec

    return ZetaSpec.parse(text)


def _weights(text):
    from .tmd import DepthWeights

    return DepthWeights.parse(text)


# subcommands --------------------------------------------------------------------

def cmd_gen(args):
    from .datagen import GenSpec, generate, parse_model, parse_range

    name, params = parse_model(args.model)
    lo, hi = parse_range(args.nodes, int)
    ds = generate(GenSpec(name, params, (lo, hi), args.count, args.seed))
    _save(ds, args.out)


def cmd_label(args):
    from .datagen import LabelSpec, label_cycle_median

    ds = _load(args.input)
    spec = LabelSpec(args.task, args.mode, tuple(args.lengths))
    out = label_cycle_median(ds, spec)
    log.info("label 1: %d, label 0: %d", sum(out.labels), len(out) - sum(out.labels))
    _save(out, args.out)


def cmd_split(args):
    from .datagen import split_dataset

    train, test = split_dataset(_load(args.input), args.frac, args.seed)
    _save(train, args.train_out)
    _save(test, args.test_out)


def cmd_transform(args):
    from .transforms import simulate

    ds = _load(args.input)
    zeta = _zeta(args.zeta)
    out = GraphDataset([simulate(g, zeta) for g in ds.graphs], ds.labels, ds.num_classes)
    _save(out, args.out)


def cmd_wl(args):
    from .transforms import simulate
    from .wl import wl_distinguishes

    zeta = _zeta(args.zeta)
    g = simulate(_single_graph(args.a), zeta)
    h = simulate(_single_graph(args.b), zeta)
    t = wl_distinguishes(g, h, args.iters)
    print("indistinguishable" if t is None else t)


def cmd_dist(args):
    from .io import write_matrix_csv
    from .tmd import pairwise_tmd

    ds = _load(args.input)
    if len(ds) == 0:
        raise ContractError("dataset is empty")
    m = pairwise_tmd(ds, args.depth, _weights(args.weight), _zeta(args.zeta))
    write_matrix_csv(args.out, m.values, m.labels, m.labels)
    log.info("wrote %dx%d matrix to %s", len(ds), len(ds), args.out)


def cmd_xi(args):
    from .io import fmt_real, write_columns_csv
    from .tmd import cross_tmd, set_distance

    train, test = _load(args.train), _load(args.test)
    if len(train) == 0:
        raise ContractError("training set is empty")
    if len(test) == 0:
        raise ContractError("test set is empty")
    mat = cross_tmd(test.graphs, train.graphs, args.depth, _weights(args.weight), _zeta(args.zeta))
    xi, minima = set_distance(mat)
    if args.out:
        nearest = np.argmin(mat, axis=1)
        write_columns_csv(
            args.out,
            ["test_index", "min_distance", "nearest_train"],
            [range(len(test)), [float(v) for v in minima], nearest.tolist()],
        )
    print(fmt_real(xi))


def _build_model(args, graphs):
    from .mpnn import load_model, random_model

    if args.weights and args.seed is not None:
        raise UsageError("give either --weights or --seed, not both")
    if args.weights:
        return load_model(args.weights)
    if args.seed is None:
        raise UsageError("mpnn needs --weights or --seed")
    if not args.arch:
        raise UsageError("--seed needs --arch T,hidden[,mlp_depth]")
    try:
        parts = [int(t) for t in args.arch.split(",")]
    except ValueError:
        raise UsageError(f"bad --arch {args.arch!r}") from None
    if len(parts) not in (2, 3):
        raise UsageError("--arch takes T,hidden[,mlp_depth]")
    input_dim, edge_dim = args.input_dim, args.edge_dim
    if graphs:
        from .wl import check_compatible

        fdim, edim = check_compatible(graphs)
        input_dim = fdim if input_dim is None else input_dim
        edge_dim = (edim or 0) if edge_dim is None else edge_dim
    if input_dim is None:
        raise UsageError("--seed without --graphs needs --input-dim")
    return random_model(args.seed, input_dim, parts[0], parts[1], args.classes, edge_dim or 0,
                        parts[2] if len(parts) == 3 else 2)


def cmd_mpnn(args):
    from .io import write_columns_csv, write_matrix_csv
    from .mpnn import forward, margin_loss, save_model
    from .transforms import simulate

    ds = None
    graphs = None
    if args.graphs:
        ds = _load(args.graphs)
        zeta = _zeta(args.zeta)
        graphs = [simulate(g, zeta) for g in ds.graphs]
    model = _build_model(args, graphs)
    if args.save_weights:
        save_model(model, args.save_weights)
        log.info("wrote weights to %s", args.save_weights)
    if graphs is None:
        if args.out or args.margin is not None or args.correct_out:
            raise UsageError("--out, --margin and --correct-out need --graphs")
        return
    logits = np.array([forward(model, g) for g in graphs]).reshape(len(graphs), model.num_classes)
    if args.out:
        write_matrix_csv(args.out, logits, range(model.num_classes))
    if args.margin is not None or args.correct_out:
        if ds.labels is None:
            raise ValidationError("dataset has no labels")
        labels = np.array(ds.labels)
        if args.margin is not None:
            from .io import fmt_real

            print(fmt_real(margin_loss(logits, labels, args.margin)))
        if args.correct_out:
            correct = (np.argmax(logits, axis=1) == labels).astype(int)
            write_columns_csv(args.correct_out, ["graph", "correct"], [range(len(graphs)), correct.tolist()])


def _bound_params(args):
    from .bound import BoundParams

    with open(args.params, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.params}: bad JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ValidationError(f"{args.params}: expected a JSON object")
    derived = {}
    if args.weights:
        from .mpnn import forward, load_model, margin_loss, model_bound_fields
        from .transforms import simulate

        model = load_model(args.weights)
        graphs = None
        if args.train:
            train = _load(args.train)
            zeta = _zeta(args.zeta)
            graphs = [simulate(g, zeta) for g in train.graphs]
            derived["n_train"] = len(graphs)
            if train.labels is not None and "gamma" in raw:
                logits = np.array([forward(model, g) for g in graphs]).reshape(len(graphs), model.num_classes)
                derived["train_margin_loss"] = margin_loss(logits, train.labels, float(raw["gamma"]))
        derived.update(model_bound_fields(model, graphs, classifier_only=args.fixed_encoder))
    elif args.train:
        raise UsageError("--train needs --weights")
    # explicit values in the params file take precedence
    return BoundParams.from_dict({**derived, **raw})


def cmd_bound(args):
    from dataclasses import replace

    from .bound import bound_curve, fixed_encoder_bound, generalization_gap_bound
    from .io import read_column_csv, write_columns_csv

    p = _bound_params(args)
    if args.dist_file:
        col = read_column_csv(args.dist_file, "min_distance" if _has_column(args.dist_file, "min_distance") else None)
        try:
            dists = sorted(float(v) for v in col)
        except ValueError as exc:
            raise ValidationError(f"{args.dist_file}: {exc}") from None
    else:
        dists = [float(p.xi)]
    if args.fixed_encoder:
        values = [fixed_encoder_bound(p, x) for x in np.maximum.accumulate(dists)] if dists else []
    else:
        values = bound_curve(dists, p).tolist() if args.dist_file else [generalization_gap_bound(replace(p))]
    write_columns_csv(args.out, ["distance", "bound"], [[float(d) for d in dists], [float(v) for v in values]])
    log.info("wrote %d bound values to %s", len(values), args.out)


def _has_column(path, name):
    with open(path, encoding="utf-8") as fh:
        return name in fh.readline().strip().split(",")


def cmd_cumacc(args):
    from .bound import cumulative_accuracy
    from .io import read_column_csv, write_columns_csv

    name = "min_distance" if _has_column(args.dist, "min_distance") else None
    try:
        d = [float(v) for v in read_column_csv(args.dist, name)]
        c = [int(v) for v in read_column_csv(args.correct, "correct" if _has_column(args.correct, "correct") else None)]
    except ValueError as exc:
        raise ValidationError(str(exc)) from None
    acc = cumulative_accuracy(d, c)
    write_columns_csv(args.out, ["distance", "cumulative_accuracy"],
                      [[float(v) for v in sorted(d)], [float(v) for v in acc]])


HANDLERS = {name: globals()["cmd_" + name] for name in COMMANDS}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _with_config(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"zetatmd: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"zetatmd: error: {exc}", file=sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="zetatmd: %(message)s", stream=sys.stderr, force=True)
    try:
        set_threads(args.threads)
        HANDLERS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"zetatmd: error: {exc}", file=sys.stderr)
        return 2
    except ZetaTmdError as exc:
        print(f"zetatmd: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"zetatmd: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
