"""Command-line entry point.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""

import argparse
import sys

import numpy as np

from . import fileio, metrics, objectives
from .rng import SplitMix64
from .style import batch_styles_standardize, fourier_augment, r_sweep_views
from .validation import l2_normalize


class UsageError(Exception):
    pass


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog="batchstyles",
        description="Fourier style augmentation, SSL loss evaluation and embedding diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    aug = sub.add_parser("augment", help="render an N x V grid of augmented views")
    aug.add_argument("--input", required=True, help="directory of same-sized PNG files")
    aug.add_argument("--output", required=True, help="grid PNG to write")
    aug.add_argument("--mode", choices=("fa", "bss", "none"), default="bss")
    aug.add_argument("--views", type=int, default=2)
    aug.add_argument("--r-min", type=float, default=0.02)
    aug.add_argument("--r-max", type=float, default=1.0)
    aug.add_argument("--seed", type=_u64, default=0)
    aug.add_argument("--r-sweep", type=_float_list, default=None,
                     help="fixed ratios, one column each, sharing one style image")
    aug.set_defaults(func=cmd_augment)

    met = sub.add_parser("metrics", help="embedding diagnostics")
    msub = met.add_subparsers(dest="metric", required=True)

    purity = msub.add_parser("purity", help="average domain purity per k")
    purity.add_argument("--emb", required=True)
    purity.add_argument("--labels", required=True)
    purity.add_argument("--k", type=_int_list, default=[5, 10, 20])
    purity.set_defaults(func=cmd_purity)

    homog = msub.add_parser("homogeneity", help="prototype assignment homogeneity")
    homog.add_argument("--emb", required=True)
    homog.add_argument("--labels", required=True)
    homog.add_argument("--protos", required=True)
    homog.add_argument("--label", choices=("domain", "class"), default="domain")
    homog.add_argument("--sk-iters", type=int, default=3)
    homog.add_argument("--sk-eps", type=float, default=0.05)
    homog.set_defaults(func=cmd_homogeneity)

    negsim = msub.add_parser("negsim", help="anchor-negative cosine similarity histogram")
    negsim.add_argument("--emb", required=True)
    negsim.add_argument("--views", type=int, required=True)
    negsim.add_argument("--bins", type=int, default=50)
    negsim.set_defaults(func=cmd_negsim)

    loss = sub.add_parser("loss", help="evaluate an SSL objective on stored embeddings")
    lsub = loss.add_subparsers(dest="loss", required=True)

    ntx = lsub.add_parser("ntxent", help="SimCLR NT-Xent")
    _grid_args(ntx)
    ntx.add_argument("--temp", type=float, default=0.5)
    ntx.set_defaults(func=cmd_ntxent)

    swav = lsub.add_parser("swav", help="multi-crop SWaV; the first 2 views are global")
    _grid_args(swav)
    swav.add_argument("--protos", required=True)
    swav.add_argument("--temp", type=float, default=0.1)
    swav.add_argument("--sk-iters", type=int, default=3)
    swav.add_argument("--sk-eps", type=float, default=0.05)
    swav.set_defaults(func=cmd_swav)

    msn = lsub.add_parser("msn", help="MSN; --emb holds masked views, --targets unmasked")
    _grid_args(msn)
    msn.add_argument("--targets", required=True, help="EMB1 file with one row per content")
    msn.add_argument("--protos", required=True)
    msn.add_argument("--tau", type=float, default=0.1)
    msn.add_argument("--tau-plus", type=float, default=0.025)
    msn.add_argument("--lambda", dest="lam", type=float, default=1.0)
    msn.add_argument("--sk-iters", type=int, default=3)
    msn.set_defaults(func=cmd_msn)
    return parser


def _grid_args(p):
    p.add_argument("--emb", required=True, help="EMB1 file, rows ordered content-major")
    p.add_argument("--contents", type=int, required=True)
    p.add_argument("--views", type=int, required=True)


# -- helpers ---------------------------------------------------------------

def _load_unit(path):
    vectors, _ = fileio.read_embeddings(path)
    norms = np.linalg.norm(vectors, axis=1)
    if np.any(norms == 0):
        raise fileio.FileFormatError(f"{path}: zero-norm row")
    return l2_normalize(vectors)


def _load_grid(path, contents, views):
    if contents < 1 or views < 1:
        raise UsageError("--contents and --views must be >= 1")
    vectors = _load_unit(path)
    if vectors.shape[0] != contents * views:
        raise UsageError(
            f"{path} has {vectors.shape[0]} rows, expected contents*views = {contents * views}"
        )
    return vectors.reshape(contents, views, -1)


def _emit(line):
    sys.stdout.write(line + "\n")


# -- commands --------------------------------------------------------------

def cmd_augment(args):
    if not (0.0 <= args.r_min <= 1.0 and 0.0 <= args.r_max <= 1.0):
        raise UsageError("--r-min and --r-max must lie in [0, 1]")
    if args.r_min > args.r_max:
        raise UsageError(f"invalid ratio range: --r-min {args.r_min} > --r-max {args.r_max}")
    if args.views < 1:
        raise UsageError("--views must be >= 1")
    if args.r_sweep is not None and (
        not args.r_sweep or any(not 0.0 <= r <= 1.0 for r in args.r_sweep)
    ):
        raise UsageError("--r-sweep values must lie in [0, 1]")

    X = fileio.load_images(args.input)
    n = X.shape[0]
    rng = SplitMix64(args.seed)
    ratio_range = (args.r_min, args.r_max)
    if args.r_sweep is not None:
        views = r_sweep_views(X, args.r_sweep, rng.randbelow(n))
    elif args.mode == "bss":
        if args.views > n:
            raise UsageError(f"--views {args.views} exceeds the {n} input images")
        views = batch_styles_standardize(X, args.views, ratio_range, rng)
    elif args.mode == "fa":
        views = np.stack([fourier_augment(X, ratio_range, rng) for _ in range(args.views)], axis=1)
    else:
        views = np.repeat(X[:, None], args.views, axis=1)
    fileio.save_grid(views, args.output)
    return 0


def cmd_purity(args):
    vectors, _ = fileio.read_embeddings(args.emb)
    domains, _ = fileio.read_labels(args.labels, n=vectors.shape[0])
    n = vectors.shape[0]
    for k in args.k:
        if not 1 <= k <= n - 1:
            raise UsageError(f"k={k} out of range [1, {n - 1}]")
    for k in args.k:
        _emit(f"{k},{metrics.domain_purity(vectors, domains, k):.6f}")
    return 0


def cmd_homogeneity(args):
    vectors = _load_unit(args.emb)
    protos = _load_unit(args.protos)
    if protos.shape[1] != vectors.shape[1]:
        raise UsageError("embedding and prototype dimensions differ")
    domains, classes = fileio.read_labels(args.labels, n=vectors.shape[0])
    labels = domains if args.label == "domain" else classes
    value = metrics.prototype_homogeneity(vectors, labels, protos, args.sk_eps, args.sk_iters)
    _emit(f"{value:.6f}")
    return 0


def cmd_negsim(args):
    vectors = _load_unit(args.emb)
    if args.views < 1 or vectors.shape[0] % args.views:
        raise UsageError(f"{vectors.shape[0]} rows are not divisible by --views {args.views}")
    if args.bins < 1:
        raise UsageError("--bins must be >= 1")
    hist = metrics.anchor_negative_similarities(
        vectors.reshape(-1, args.views, vectors.shape[1]), args.bins
    )
    for lo, hi, count in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
        _emit(f"{lo:.6f},{hi:.6f},{count}")
    return 0


def _emit_loss(value):
    # more digits than the metrics output: losses are compared at 1e-9
    _emit(f"{value:.12f}")


def cmd_ntxent(args):
    if args.temp <= 0:
        raise UsageError("--temp must be > 0")
    if args.views < 2:
        raise UsageError("NT-Xent needs --views >= 2")
    z = _load_grid(args.emb, args.contents, args.views)
    _emit_loss(objectives.nt_xent(z, args.temp))
    return 0


def cmd_swav(args):
    if args.temp <= 0 or args.sk_eps <= 0 or args.sk_iters < 1:
        raise UsageError("--temp and --sk-eps must be > 0, --sk-iters >= 1")
    if args.views < 2:
        raise UsageError("SWaV needs --views >= 2 (2 global views first)")
    z = _load_grid(args.emb, args.contents, args.views)
    protos = _load_unit(args.protos)
    if protos.shape[1] != z.shape[2]:
        raise UsageError("embedding and prototype dimensions differ")
    p_all = [objectives.prototype_probs(z[:, v], protos, args.temp) for v in range(args.views)]
    q_globals = [
        objectives.sinkhorn_knopp(z[:, v] @ protos.T, args.sk_eps, args.sk_iters) for v in (0, 1)
    ]
    _emit_loss(objectives.swav_loss_multicrop(q_globals, p_all))
    return 0


def cmd_msn(args):
    if not args.tau > args.tau_plus > 0:
        raise UsageError("temperatures must satisfy --tau > --tau-plus > 0")
    if args.lam < 0 or args.sk_iters < 0:
        raise UsageError("--lambda and --sk-iters must be >= 0")
    z_masked = _load_grid(args.emb, args.contents, args.views)
    z_targets = _load_grid(args.targets, args.contents, 1)[:, 0]
    protos = _load_unit(args.protos)
    if protos.shape[1] != z_masked.shape[2]:
        raise UsageError("embedding and prototype dimensions differ")
    p_masked, p_targets = objectives.msn_probs(
        z_masked, z_targets, protos, args.tau, args.tau_plus, args.sk_iters
    )
    _emit_loss(objectives.msn_loss(p_masked, p_targets, args.lam))
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"{parser.prog}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
