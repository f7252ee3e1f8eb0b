"""Compiled whole-run loops for the learning policies.

Each kernel replays outcome matrices ``x``, ``y`` (shape (T, N)) against one
policy and returns the arm chosen in every slot. They consume ``rng`` in
exactly the order the classes in :mod:`adaport.policies` do, so a kernel run
and a step-by-step run from the same generator state choose the same arms.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def _argmax(scores):
    best = 0
    for i in range(1, scores.shape[0]):
        if scores[i] > scores[best]:
            best = i
    return best


@numba.njit(cache=True)
def run_adaport(x, y, rng):
    T, n = x.shape
    alpha_bar = np.zeros(n)
    s = np.zeros(n)
    f = np.zeros(n)
    scores = np.empty(n)
    choices = np.empty(T, dtype=np.int64)
    for t in range(T):
        for i in range(n):
            scores[i] = alpha_bar[i] * rng.beta(s[i] + 1.0, f[i] + 1.0)
        c = _argmax(scores)
        choices[t] = c
        for i in range(n):
            alpha_bar[i] += (x[t, i] - alpha_bar[i]) / (t + 1)
        if y[t, c]:
            s[c] += 1.0
        else:
            f[c] += 1.0
    return choices


@numba.njit(cache=True)
def run_ts2bb(x, y, rng):
    T, n = x.shape
    sa = np.zeros(n)
    fa = np.zeros(n)
    sb = np.zeros(n)
    fb = np.zeros(n)
    theta_a = np.empty(n)
    scores = np.empty(n)
    choices = np.empty(T, dtype=np.int64)
    for t in range(T):
        for i in range(n):
            theta_a[i] = rng.beta(sa[i] + 1.0, fa[i] + 1.0)
        for i in range(n):
            scores[i] = theta_a[i] * rng.beta(sb[i] + 1.0, fb[i] + 1.0)
        c = _argmax(scores)
        choices[t] = c
        if x[t, c]:
            sa[c] += 1.0
        else:
            fa[c] += 1.0
        if y[t, c]:
            sb[c] += 1.0
        else:
            fb[c] += 1.0
    return choices


@numba.njit(cache=True)
def run_ts1b(x, y, rng):
    T, n = x.shape
    s = np.zeros(n)
    f = np.zeros(n)
    scores = np.empty(n)
    choices = np.empty(T, dtype=np.int64)
    for t in range(T):
        for i in range(n):
            scores[i] = rng.beta(s[i] + 1.0, f[i] + 1.0)
        c = _argmax(scores)
        choices[t] = c
        if x[t, c] and y[t, c]:
            s[c] += 1.0
        else:
            f[c] += 1.0
    return choices


@numba.njit(cache=True)
def run_exp3(x, y, rng, gamma, renorm_at):
    T, n = x.shape
    w = np.ones(n)
    p = np.empty(n)
    choices = np.empty(T, dtype=np.int64)
    for t in range(T):
        total = 0.0
        for i in range(n):
            total += w[i]
        for i in range(n):
            p[i] = (1.0 - gamma) * w[i] / total + gamma / n
        u = rng.random()
        # first index whose cumulative probability exceeds u
        acc = 0.0
        c = n - 1
        for i in range(n):
            acc += p[i]
            if acc > u:
                c = i
                break
        choices[t] = c
        z = x[t, c] * y[t, c]
        if z:
            w[c] *= math.exp(gamma * (z / p[c]) / n)
            top = w[0]
            for i in range(1, n):
                if w[i] > top:
                    top = w[i]
            if top > renorm_at:
                for i in range(n):
                    w[i] /= top
    return choices
