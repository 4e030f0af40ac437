# Copyright 2026 The vtoff Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the synthetic image fixtures under tests/fixtures.

Usage: python3 make_fixtures.py [out_dir]
"""

import io
import os
import sys

import numpy as np
from PIL import Image, ImageDraw, ImageFilter
from scipy.ndimage import gaussian_filter

W, H = 192, 256
# Garments are rendered at the dataset's native 768x1024.
GW, GH = 768, 1024
SS = 4  # supersampling for antialiased silhouettes


def shirt_mask(w, h, rng):
    """Boolean t-shirt silhouette, drawn supersampled then thresholded."""
    big = Image.new("L", (w * SS, h * SS), 0)
    d = ImageDraw.Draw(big)
    s = SS
    cx = w / 2
    top = h * rng.uniform(0.16, 0.22)
    bottom = h * rng.uniform(0.84, 0.90)
    half = w * rng.uniform(0.27, 0.31)
    sleeve = w * rng.uniform(0.16, 0.2)
    neck = w * 0.09
    body = [
        (cx - neck, top), (cx - half, top + 6), (cx - half - sleeve, top + h * 0.18),
        (cx - half - sleeve * 0.6, top + h * 0.25), (cx - half + 4, top + h * 0.17),
        (cx - half + 2, bottom), (cx + half - 2, bottom), (cx + half - 4, top + h * 0.17),
        (cx + half + sleeve * 0.6, top + h * 0.25), (cx + half + sleeve, top + h * 0.18),
        (cx + half, top + 6), (cx + neck, top),
    ]
    d.polygon([(x * s, y * s) for x, y in body], fill=255)
    d.ellipse([(cx - neck) * s, (top - neck * 0.6) * s, (cx + neck) * s, (top + neck * 0.9) * s], fill=0)
    small = big.resize((w, h), Image.LANCZOS)
    return np.asarray(small, dtype=np.float64) / 255.0


def palette(rng, n):
    cols = []
    while len(cols) < n:
        c = rng.integers(0, 230, size=3)
        if c.max() - c.min() > 40 or c.mean() < 120:
            cols.append(c.astype(np.float64))
    return cols


def light_palette(rng, n):
    """A light base colour and progressively darker accents of the same hue."""
    base = rng.uniform(190, 245, size=3)
    base[rng.integers(0, 3)] -= rng.uniform(15, 45)
    return [np.clip(base - k * rng.uniform(12, 28), 0, 255) for k in range(n)]


def pattern(kind, w, h, rng, light=False, period_range=(5.0, 11.0)):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    c = light_palette(rng, 3) if light else palette(rng, 3)
    period = rng.uniform(*period_range)
    if kind == "hstripes":
        t = (np.sin(2 * np.pi * yy / period) > 0)[..., None]
    elif kind == "vstripes":
        t = (np.sin(2 * np.pi * xx / period) > 0)[..., None]
    elif kind == "diagonal":
        t = (np.sin(2 * np.pi * (xx + yy) / (period * 1.4)) > 0)[..., None]
    elif kind == "checks":
        t = ((np.floor(xx / period) + np.floor(yy / period)) % 2 == 0)[..., None]
    elif kind == "dots":
        gx = (xx % (period * 1.6)) - period * 0.8
        gy = (yy % (period * 1.6)) - period * 0.8
        t = ((gx * gx + gy * gy) < (period * 0.45) ** 2)[..., None]
    elif kind == "plaid":
        a = np.sin(2 * np.pi * xx / (period * 2)) > 0.3
        b = np.sin(2 * np.pi * yy / (period * 2)) > 0.3
        img = np.where((a & b)[..., None], c[0], np.where((a | b)[..., None], c[1], c[2]))
        return img
    elif kind == "noise":
        n = rng.normal(0, 1, size=(h // 2 + 1, w // 2 + 1))
        n = np.kron(n, np.ones((2, 2)))[:h, :w]
        t = (n > 0)[..., None]
    elif kind == "zigzag":
        t = (np.sin(2 * np.pi * (yy + 4 * np.abs(((xx / period) % 2) - 1) * period) / period) > 0)[..., None]
    elif kind == "waves":
        t = (np.sin(2 * np.pi * yy / period + 2.0 * np.sin(2 * np.pi * xx / (period * 4))) > 0)[..., None]
    elif kind == "logo":
        base = np.ones((h, w, 1)) * c[0]
        img = Image.fromarray(np.clip(np.broadcast_to(base, (h, w, 3)), 0, 255).astype(np.uint8))
        d = ImageDraw.Draw(img)
        for i in range(6):
            x0, y0 = rng.uniform(0.3, 0.6) * w, rng.uniform(0.3, 0.6) * h
            r = rng.uniform(6, 20)
            col = tuple(int(v) for v in palette(rng, 1)[0])
            if i % 2:
                d.ellipse([x0 - r, y0 - r, x0 + r, y0 + r], outline=col, width=3)
            else:
                d.rectangle([x0 - r, y0 - r / 2, x0 + r, y0 + r / 2], fill=col)
        d.text((w * 0.38, h * 0.45), "VTOFF", fill=tuple(int(v) for v in c[1]))
        return np.asarray(img, dtype=np.float64)
    elif kind == "grid":
        t = (((xx % period) < 1.5) | ((yy % period) < 1.5))[..., None]
    else:
        raise ValueError(kind)
    return np.where(t, c[0], c[1])


GARMENT_KINDS = ["hstripes", "vstripes", "diagonal", "checks", "dots", "plaid",
                 "noise", "zigzag", "waves", "logo", "grid", "checks"]


def garment(kind, rng, w=W, h=H, light=False, period_range=(5.0, 11.0), grain=0.0):
    m = shirt_mask(w, h, rng)[..., None]
    tex = pattern(kind, w, h, rng, light, period_range)
    shade = 1.0 - 0.08 * np.abs(np.linspace(-1, 1, w))[None, :, None]
    tex = tex * shade
    if grain > 0:
        # Fabric weave: fine, slightly blurred noise.
        n = gaussian_filter(rng.normal(0, 1, size=(h, w)), 0.5)
        n = (n - n.mean()) / n.std()
        tex = tex + grain * n[..., None]
    img = m * tex + (1 - m) * 255.0
    return Image.fromarray(np.clip(np.rint(img), 0, 255).astype(np.uint8))


def person(garment_img, rng):
    """Plain backdrop, head, arms, and a torso wearing the garment texture."""
    bg = rng.integers(170, 235, size=3)
    img = Image.new("RGB", (W, H), tuple(int(v) for v in bg))
    d = ImageDraw.Draw(img)
    skin = (int(rng.integers(150, 230)), int(rng.integers(110, 180)), int(rng.integers(80, 150)))
    d.ellipse([W * 0.38, H * 0.04, W * 0.62, H * 0.22], fill=skin)
    d.rectangle([W * 0.2, H * 0.3, W * 0.28, H * 0.62], fill=skin)
    d.rectangle([W * 0.72, H * 0.3, W * 0.8, H * 0.62], fill=skin)
    d.rectangle([W * 0.34, H * 0.72, W * 0.47, H * 0.98], fill=(40, 40, 70))
    d.rectangle([W * 0.53, H * 0.72, W * 0.66, H * 0.98], fill=(40, 40, 70))
    mask = Image.new("L", (W, H), 0)
    md = ImageDraw.Draw(mask)
    md.polygon([(W * 0.28, H * 0.24), (W * 0.72, H * 0.24), (W * 0.7, H * 0.76), (W * 0.3, H * 0.76)], fill=255)
    tex = garment_img.resize((W, H), Image.BICUBIC)
    img.paste(tex, (0, 0), mask)
    return img, Image.merge("RGB", [mask] * 3)


def smooth_noise(w, h, rng, scale):
    n = rng.normal(0, 1, size=(h // scale + 2, w // scale + 2, 3))
    im = Image.fromarray(np.uint8(np.clip(128 + 50 * n, 0, 255)))
    return np.asarray(im.resize((w + scale * 2, h + scale * 2), Image.BICUBIC), dtype=np.float64)[:h, :w]


def identity_image(i, rng):
    size = 176
    if i < 8:
        g = garment(GARMENT_KINDS[i % len(GARMENT_KINDS)], rng, size, size)
        return g
    if i < 14:
        img = smooth_noise(size, size, rng, 4 + 2 * (i - 8))
        return Image.fromarray(np.uint8(np.clip(img, 0, 255)))
    img = Image.new("RGB", (size, size), tuple(int(v) for v in rng.integers(0, 255, size=3)))
    d = ImageDraw.Draw(img)
    for _ in range(12):
        x0, y0 = rng.uniform(0, size, size=2)
        x1, y1 = x0 + rng.uniform(10, 80), y0 + rng.uniform(10, 80)
        col = tuple(int(v) for v in rng.integers(0, 255, size=3))
        if rng.uniform() < 0.5:
            d.ellipse([x0, y0, x1, y1], fill=col)
        else:
            d.rectangle([x0, y0, x1, y1], fill=col)
    return img.filter(ImageFilter.GaussianBlur(0.7))


def parity_pairs(garments, rng):
    pairs = {}
    g0, g1, g2, g3 = (np.asarray(g, dtype=np.float64) for g in garments[:4])
    noisy = np.clip(g0 + rng.normal(0, 12, size=g0.shape), 0, 255)
    pairs["noise"] = (garments[0], Image.fromarray(np.uint8(np.rint(noisy))))
    shifted = np.full_like(g1, 255.0)
    shifted[:, 3:] = g1[:, :-3]
    pairs["shift"] = (garments[1], Image.fromarray(np.uint8(shifted)))
    pairs["blur"] = (garments[2], garments[2].filter(ImageFilter.GaussianBlur(1.5)))
    buf = io.BytesIO()
    garments[3].save(buf, format="JPEG", quality=25)
    pairs["jpeg"] = (garments[3], Image.open(io.BytesIO(buf.getvalue())).convert("RGB"))
    pairs["gamma"] = (garments[4], Image.fromarray(np.uint8(np.rint(255.0 * (np.asarray(garments[4]) / 255.0) ** 1.6))))
    pairs["other"] = (garments[5], garments[6])
    return pairs


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))
    rng = np.random.default_rng(20260116)
    for sub in ["garments", "identity", "parity", "dataset/person", "dataset/garment", "dataset/mask"]:
        os.makedirs(os.path.join(out, sub), exist_ok=True)

    # Light garments with fine prints and fabric grain, the typical catalogue
    # shot on a white backdrop.
    garments = []
    for i, kind in enumerate(GARMENT_KINDS):
        g = garment(kind, rng, GW, GH, light=True, period_range=(4.0, 12.0), grain=rng.uniform(7.0, 12.0))
        g.save(os.path.join(out, "garments", f"g{i:02d}_{kind}.jpg"), quality=92)
        garments.append(g.resize((W, H), Image.LANCZOS))

    for i in range(20):
        identity_image(i, rng).convert("RGB").save(os.path.join(out, "identity", f"id{i:02d}.png"))

    for name, (a, b) in parity_pairs(garments, rng).items():
        a.save(os.path.join(out, "parity", f"{name}_ref.png"))
        b.save(os.path.join(out, "parity", f"{name}_cand.png"))

    for i in range(3):
        p, m = person(garments[i + 6], rng)
        stem = f"p{i + 1:02d}"
        p.save(os.path.join(out, "dataset", "person", stem + ".png"))
        m.save(os.path.join(out, "dataset", "mask", stem + ".png"))
        garments[i + 6].save(os.path.join(out, "dataset", "garment", stem + ".png"))


if __name__ == "__main__":
    main()
