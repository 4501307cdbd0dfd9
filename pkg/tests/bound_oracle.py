"""Straight transcription of the bound in 50-digit arithmetic."""

import mpmath

mpmath.mp.dps = 50


def bound_mp(p):
    mp = mpmath.mpf
    b, D, N, a = mp(p.hidden_dim), mp(p.depth_count), mp(p.n_train), mp(p.alpha)
    gamma, delta, xi = mp(p.gamma), mp(p.delta), mp(p.xi)
    t1 = b * mp(p.weight_sq_norm_sum) * xi ** (2 / D) / (N ** (2 * a) * (gamma / 8) ** (2 / D))
    dB = mp(p.max_degree) * mp(p.feature_bound)
    inner = 2 * b * D * mp(p.spec_cap) * ((2 * dB) ** (1 / D) if dB > 0 else 1)
    t2 = b ** 2 * max(mp(0), mpmath.log(inner)) / (N ** (2 * a) * gamma ** (1 / D) * delta)
    t3 = 1 / N ** (1 - 2 * a)
    t4 = mp(p.lip_eta) * p.classes * xi
    return mp(p.train_margin_loss) + t1 + t2 + t3 + t4


def random_params(rng):
    from zetatmd.bound import BoundParams

    return BoundParams(
        gamma=float(rng.uniform(0.01, 10)),
        delta=float(rng.uniform(0.001, 0.999)),
        alpha=float(rng.uniform(0.001, 0.249)),
        n_train=int(rng.integers(1, 100000)),
        classes=int(rng.integers(2, 20)),
        lip_eta=float(rng.uniform(0, 5)),
        spec_cap=float(rng.uniform(0.01, 10)),
        hidden_dim=int(rng.integers(1, 256)),
        depth_count=int(rng.integers(1, 20)),
        max_degree=int(rng.integers(0, 50)),
        feature_bound=float(rng.uniform(0, 10)) if rng.random() > 0.1 else 0.0,
        weight_sq_norm_sum=float(rng.uniform(0, 100)),
        train_margin_loss=float(rng.uniform(0, 1)),
        xi=float(rng.uniform(0, 50)) if rng.random() > 0.1 else 0.0,
    )
