#!/usr/bin/env python3
"""Train the 5-layer 3-D CNN denoiser on synthetic phantom patches and export
a PNPD weight file the C++ runtime can load.

Phantoms are produced by the `pnpmri phantom` command and read back from CPLX
files, so training data comes from the same generator the experiments use.
"""

import argparse
import hashlib
import json
import math
import os
import struct
import subprocess
import sys
import tempfile
import time

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

CERT_GRID = 8


def read_cplx(path):
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != b"CPLX":
        raise ValueError(f"{path}: not a CPLX file")
    version, ndim = struct.unpack_from("<II", raw, 4)
    if version != 1:
        raise ValueError(f"{path}: unsupported version {version}")
    dims = struct.unpack_from(f"<{ndim}I", raw, 12)
    payload = np.frombuffer(raw, dtype="<f4", offset=12 + 4 * ndim)
    if payload.size != 2 * int(np.prod(dims)):
        raise ValueError(f"{path}: payload size mismatch")
    z = payload[0::2].astype(np.float64) + 1j * payload[1::2].astype(np.float64)
    # dims are fastest-first; numpy wants slowest-first
    return z.reshape(tuple(reversed(dims)))


def write_cplx(path, z):
    dims = list(reversed(z.shape))
    out = np.empty(2 * z.size, dtype="<f4")
    flat = z.reshape(-1)
    out[0::2] = flat.real
    out[1::2] = flat.imag
    with open(path, "wb") as f:
        f.write(b"CPLX")
        f.write(struct.pack("<II", 1, len(dims)))
        f.write(struct.pack(f"<{len(dims)}I", *dims))
        f.write(out.tobytes())


def extract_patches(images, patch, stride):
    """Deterministic grid of (nt, ny, nx) patches from (nt, ny, nx) images."""
    pt, py, px = patch
    st, sy, sx = stride
    out = []
    for img in images:
        nt, ny, nx = img.shape
        if pt > nt or py > ny or px > nx:
            raise ValueError("patch larger than image")
        for t in range(0, nt - pt + 1, st):
            for y in range(0, ny - py + 1, sy):
                for x in range(0, nx - px + 1, sx):
                    out.append(img[t:t + pt, y:y + py, x:x + px])
    return out


def add_noise_exact(x, snr_db, gen):
    """x + w with 20 log10(|x|/|w|) = snr_db exactly, per leading index."""
    w = torch.complex(torch.randn(x.shape, generator=gen, dtype=torch.float64),
                      torch.randn(x.shape, generator=gen, dtype=torch.float64))
    dims = tuple(range(1, x.dim()))
    xn = torch.linalg.vector_norm(x, dim=dims, keepdim=True)
    wn = torch.linalg.vector_norm(w, dim=dims, keepdim=True)
    return x + w * (xn / wn) * 10.0 ** (-snr_db / 20.0)


class SNConv3d(nn.Module):
    """3x3x3 convolution whose effective kernel is v / max(1, sigma(v)), with
    sigma the periodic-boundary operator norm on the certification grid.

    The periodic operator is block-diagonalised by the DFT, so sigma is the
    largest singular value over the per-frequency (out x in) channel
    matrices. One warm-started power step per frequency and training step
    keeps the estimate tight; gradients flow through sigma."""

    def __init__(self, cin, cout, bias, gen):
        super().__init__()
        ref = nn.Conv3d(cin, cout, 3, padding=1, bias=bias)
        self.in_channels, self.out_channels = cin, cout
        self.v = nn.Parameter(ref.weight.detach().clone())
        self.bias = nn.Parameter(ref.bias.detach().clone()) if bias else None
        nfreq = CERT_GRID * CERT_GRID * (CERT_GRID // 2 + 1)
        u = torch.complex(torch.randn(nfreq, cin, 1, generator=gen), torch.randn(nfreq, cin, 1, generator=gen))
        self.register_buffer("u", u / torch.linalg.vector_norm(u, dim=1, keepdim=True))

    def spectrum(self, w):
        o, i = w.shape[:2]
        padded = F.pad(w, (0, CERT_GRID - 3) * 3)
        return torch.fft.rfftn(padded, dim=(2, 3, 4)).permute(2, 3, 4, 0, 1).reshape(-1, o, i)

    def sigma(self, power_steps):
        s = self.spectrum(self.v)
        with torch.no_grad():
            u = self.u
            for _ in range(power_steps):
                u = s.mH @ (s @ u)
                u = u / torch.linalg.vector_norm(u, dim=1, keepdim=True).clamp_min(1e-30)
            self.u = u
        return torch.linalg.vector_norm(s @ self.u, dim=1).max()

    def weight(self, power_steps=0):
        return self.v / torch.clamp(self.sigma(power_steps), min=1.0)

    def forward(self, x, power_steps=0):
        return F.conv3d(x, self.weight(power_steps), self.bias, padding=1)


class Net(nn.Module):
    def __init__(self, gen, width=64, bias=True, power_steps=1):
        super().__init__()
        plan = [2, width, width, width, width, 2]
        self.convs = nn.ModuleList(SNConv3d(plan[k], plan[k + 1], bias, gen) for k in range(5))
        self.power_steps = power_steps

    def forward(self, x):
        steps = self.power_steps if self.training else 0
        for k, conv in enumerate(self.convs):
            x = conv(x, steps)
            if k < 4:
                x = F.relu(x)
        return x


def haar_init(net, tau, directions):
    """Set the weights so that residual-mode output approximates single-level
    undecimated 3-D Haar soft-thresholding of complex coefficients. Each
    detail band b is projected on `directions` unit vectors d_k in the complex
    plane, scaled by a = sqrt(2 / directions) so that the projections form a
    tight frame, and every projection c_bk = a d_k . (h_b * z) is clipped:

        layer 1: y = relu(c_bk + tau)           = max(c_bk, -tau) + tau
        layer 2: w = relu(2 tau - y)            = tau - clip(c_bk, tau)
        layers 3, 4: identity on w >= 0
        layer 5: net(z) = sum a d_k h_b^T * (-w) = sum a d_k h_b^T * clip(c_bk, tau)

    since the detail filters h_b have zero mean. Small coefficients are removed
    entirely, large ones shrink by about tau along their own phase. Every layer
    has norm <= 1. Leftover channels get small random weights."""
    lo = torch.tensor([0.0, 0.5, 0.5])
    hi = torch.tensor([0.0, 0.5, -0.5])
    bands = []
    for bits in range(1, 8):
        f = [hi if bits >> d & 1 else lo for d in range(3)]
        bands.append(torch.einsum("i,j,k->ijk", f[0], f[1], f[2]))
    width = net.convs[0].out_channels
    n = len(bands) * directions
    if n > width:
        raise ValueError(f"{directions} directions need {n} channels, width is {width}")
    scale = math.sqrt(2.0 / directions)
    delta = torch.zeros(3, 3, 3)
    delta[1, 1, 1] = 1.0
    with torch.no_grad():
        c1, c5 = net.convs[0], net.convs[4]
        c1.v.mul_(0.1)
        c1.v[:n] = 0.0
        c1.bias.zero_()
        c5.v.mul_(0.01)
        c5.v[:, :n] = 0.0
        c5.bias.zero_()
        for b, h in enumerate(bands):
            for k in range(directions):
                ch = b * directions + k
                d = (math.cos(math.pi * k / directions), math.sin(math.pi * k / directions))
                for r in range(2):
                    c1.v[ch, r] = scale * d[r] * h
                    c5.v[r, ch] = -scale * d[r] * torch.flip(h, dims=(0, 1, 2))
                c1.bias[ch] = tau
        for k in (1, 2, 3):
            c = net.convs[k]
            c.v.zero_()
            c.bias.zero_()
            for ch in range(width):
                c.v[ch, ch] = delta
            if k == 1:
                c.v[:n] *= -1.0
                c.bias[:n] = 2.0 * tau
        for c in net.convs:
            c.sigma(30)


def to_channels(z):
    return torch.stack([z.real, z.imag], dim=1).float()


def exact_periodic_norm(weight, grid=CERT_GRID):
    """Largest singular value of the periodic convolution on grid^3, from the
    per-frequency channel matrices."""
    w = weight.detach().double()
    o, i = w.shape[:2]
    padded = torch.zeros(o, i, grid, grid, grid, dtype=torch.float64)
    padded[..., :3, :3, :3] = w
    spec = torch.fft.fftn(padded, dim=(2, 3, 4))
    mats = spec.permute(2, 3, 4, 0, 1).reshape(-1, o, i)
    return torch.linalg.matrix_norm(mats, ord=2).max().item()


def export_pnpd(path, net, residual, meta):
    layers = list(net.convs)
    has_bias = layers[0].bias is not None
    flags = (1 if residual else 0) | (2 if has_bias else 0)
    with open(path, "wb") as f:
        f.write(b"PNPD")
        f.write(struct.pack("<II", 1, 28))
        f.write(struct.pack("<IIfIIII", len(layers), flags, meta["snr_db"], meta["patch_nx"],
                            meta["patch_ny"], meta["patch_nt"], meta["revision"]))
        for conv in layers:
            w = conv.weight().detach().float().contiguous()
            o, i = w.shape[:2]
            declared = np.float32(exact_periodic_norm(w))
            f.write(struct.pack("<IIIIIf", o, i, 3, 3, 3, declared))
            f.write(w.numpy().astype("<f4").tobytes())
            if has_bias:
                f.write(conv.bias.detach().float().numpy().astype("<f4").tobytes())


def runtime_parity(cli, weights, net, residual, patches, work):
    """Largest absolute difference between torch inference and the C++
    runtime (`pnpmri denoise`) over the given patches."""
    worst = 0.0
    net.eval()
    for k, z in enumerate(patches):
        src, dst = os.path.join(work, f"parity_{k}.cplx"), os.path.join(work, f"parity_{k}_out.cplx")
        write_cplx(src, z)
        z = read_cplx(src)  # the runtime sees float32 values
        subprocess.run([cli, "denoise", "-i", src, "-w", weights, "-o", dst], check=True)
        with torch.no_grad():
            out = net(to_channels(torch.from_numpy(z)[None]))[0].double().numpy()
        ref = out[0] + 1j * out[1]
        if residual:
            ref = z - ref
        worst = max(worst, float(np.abs(read_cplx(dst) - ref).max()))
    return worst


def make_phantoms(cli, seeds, shape, workdir):
    images = []
    nx, ny, nt = shape
    for s in seeds:
        path = os.path.join(workdir, f"phantom_{s}.cplx")
        subprocess.run([cli, "phantom", "-o", path, "--nx", str(nx), "--ny", str(ny), "--nt", str(nt),
                        "--seed", str(s)], check=True)
        images.append(read_cplx(path))
    return images


def rsnr(ref, est):
    return 20.0 * math.log10(np.linalg.norm(ref) / np.linalg.norm(ref - est))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cli", required=True, help="path to the pnpmri executable")
    ap.add_argument("--out", required=True, help="output .pnpd file")
    ap.add_argument("--train-seeds", default="1000:1064", help="phantom seed range a:b")
    ap.add_argument("--val-seeds", default="5000:5004")
    ap.add_argument("--image", default="64,64,16", help="phantom nx,ny,nt")
    ap.add_argument("--patch", default="32,32,15", help="patch nx,ny,nt")
    ap.add_argument("--stride", default="16,16,1", help="patch stride nx,ny,nt")
    ap.add_argument("--snr", type=float, default=26.0)
    ap.add_argument("--snr-min", type=float, default=None,
                    help="draw each patch's SNR uniformly from [snr-min, snr] (default: fixed --snr)")
    ap.add_argument("--normalise-loss", action="store_true",
                    help="divide each patch's squared error by its noise energy")
    ap.add_argument("--batch", type=int, default=4)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--lr-final", type=float, default=None, help="cosine decay target (default: constant)")
    ap.add_argument("--steps", type=int, default=3000)
    ap.add_argument("--power-steps", type=int, default=1, help="spectral-norm power steps per update")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bias", action=argparse.BooleanOptionalAction, default=True, help="give every layer a bias")
    ap.add_argument("--init", choices=("random", "haar"), default="haar",
                    help="haar: start from Haar soft-thresholding (needs biases, residual mode)")
    ap.add_argument("--tau", type=float, default=1.5, help="haar init threshold in noise standard deviations")
    ap.add_argument("--directions", type=int, default=9, help="haar init phase directions per band")
    ap.add_argument("--direct", action="store_true", help="predict the clean image instead of the noise")
    ap.add_argument("--eval-every", type=int, default=100)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    torch.set_num_threads(args.threads)
    torch.manual_seed(args.seed)
    gen = torch.Generator().manual_seed(args.seed)
    residual = not args.direct
    snr_min = args.snr if args.snr_min is None else args.snr_min

    shape = tuple(int(v) for v in args.image.split(","))
    px, py, pt = (int(v) for v in args.patch.split(","))
    sx, sy, st = (int(v) for v in args.stride.split(","))
    a, b = (int(v) for v in args.train_seeds.split(":"))
    va, vb = (int(v) for v in args.val_seeds.split(":"))

    with tempfile.TemporaryDirectory() as work:
        train_imgs = make_phantoms(args.cli, range(a, b), shape, work)
        val_imgs = make_phantoms(args.cli, range(va, vb), shape, work)
    for img in train_imgs + val_imgs:
        img /= np.abs(img).max()

    # exact-SNR noise on an all-zero patch is zero, so such patches carry no signal
    nonempty = lambda ps: [q for q in ps if np.abs(q).max() > 0]
    patches = torch.from_numpy(np.stack(nonempty(extract_patches(train_imgs, (pt, py, px), (st, sy, sx)))))
    val = torch.from_numpy(np.stack(nonempty(extract_patches(val_imgs, (pt, py, px), (pt, py, px)))))
    print(f"{patches.shape[0]} training patches, {val.shape[0]} validation patches", flush=True)

    if args.init == "haar" and (args.direct or not args.bias):
        ap.error("--init haar needs --bias and residual mode")
    net = Net(gen, bias=args.bias, power_steps=args.power_steps)
    if args.init == "haar":
        # per-channel noise std of a patch with exact SNR
        rms = float(np.median([torch.sqrt(torch.mean(torch.abs(q) ** 2)).item() for q in patches]))
        sigma_n = rms * 10.0 ** (-args.snr / 20.0) / math.sqrt(2.0)
        haar_init(net, args.tau * sigma_n, args.directions)
        print(f"haar init: noise std {sigma_n:.4g}, tau {args.tau * sigma_n:.4g}", flush=True)
    opt = torch.optim.Adam(net.parameters(), lr=args.lr)
    sched = None
    if args.lr_final is not None:
        sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, args.steps, eta_min=args.lr_final)

    # validation always at the nominal SNR
    val_noisy = add_noise_exact(val, args.snr, torch.Generator().manual_seed(args.seed + 1))

    def validation_gain():
        net.eval()
        with torch.no_grad():
            out = net(to_channels(val_noisy))
            est = torch.complex(out[:, 0].double(), out[:, 1].double())
            est = val_noisy - est if residual else est
        net.train()
        return float(np.mean([rsnr(v.numpy(), e.numpy()) - rsnr(v.numpy(), n.numpy())
                              for v, e, n in zip(val, est, val_noisy)]))

    trace = [{"step": 0, "val_gain_db": validation_gain()}]
    print(f"initial val gain {trace[0]['val_gain_db']:+.2f} dB", flush=True)
    start = time.time()
    net.train()
    for step in range(1, args.steps + 1):
        idx = torch.randint(0, patches.shape[0], (args.batch,), generator=gen)
        clean = patches[idx]
        u = torch.rand(args.batch, *([1] * (clean.dim() - 1)), generator=gen, dtype=torch.float64)
        noisy = add_noise_exact(clean, snr_min + (args.snr - snr_min) * u, gen)
        x = to_channels(noisy)
        target = to_channels(noisy - clean) if residual else to_channels(clean)
        err = (net(x) - target) ** 2
        if args.normalise_loss:
            # weight each patch by its inverse noise energy so high-SNR patches still count
            noise_energy = ((noisy - clean).abs() ** 2).flatten(1).mean(1).float()
            loss = (err.flatten(1).mean(1) / noise_energy).mean()
        else:
            loss = err.mean()
        if not math.isfinite(loss.item()):
            raise RuntimeError(f"loss diverged at step {step}; trace so far: {trace[-10:]}")
        opt.zero_grad()
        loss.backward()
        opt.step()
        if sched:
            sched.step()
        trace.append({"step": step, "loss": loss.item()})
        if step % args.eval_every == 0 or step == args.steps:
            trace[-1]["val_gain_db"] = validation_gain()
            print(f"step {step:6d}  loss {loss.item():.3e}  val gain {trace[-1]['val_gain_db']:+.2f} dB  "
                  f"{time.time() - start:7.0f}s", flush=True)

    # final exact pass: every exported layer's periodic norm on the certification grid <= 1
    with torch.no_grad():
        for c in net.convs:
            w = c.weight()
            sigma = exact_periodic_norm(w)
            c.v.copy_(w / (sigma * (1.0 + 1e-6)) if sigma > 1.0 else w)
            c.sigma(50)
    norms = [exact_periodic_norm(c.weight()) for c in net.convs]
    final_gain = validation_gain()
    print(f"after exact rescale: val gain {final_gain:+.2f} dB", flush=True)

    meta = {"snr_db": args.snr, "patch_nx": px, "patch_ny": py, "patch_nt": pt, "revision": 1}
    export_pnpd(args.out, net, residual, meta)
    pick = torch.randperm(val.shape[0], generator=torch.Generator().manual_seed(args.seed + 2))[:10]
    with tempfile.TemporaryDirectory() as work:
        parity = runtime_parity(args.cli, args.out, net, residual, val_noisy[pick].numpy(), work)
    print(f"runtime parity: max abs difference {parity:.3e} over {len(pick)} held-out patches", flush=True)
    config = {k: v for k, v in vars(args).items() if k not in ("cli", "out", "threads")}
    config_text = json.dumps(config, sort_keys=True)
    with open(args.out + ".manifest", "w") as f:
        f.write(f"config_sha256 = {hashlib.sha256(config_text.encode()).hexdigest()}\n")
        f.write(f"config = {config_text}\n")
        f.write("intensity_normalisation = unit peak magnitude per source image\n")
        f.write(f"layer_norms = {' '.join(f'{n:.6f}' for n in norms)}\n")
        f.write(f"residual = {str(residual).lower()}\n")
        f.write(f"validation_gain_db = {final_gain:.4f}\n")
        f.write(f"runtime_parity_max_abs = {parity:.3e}\n")
        f.write(f"weights_sha256 = {hashlib.sha256(open(args.out, 'rb').read()).hexdigest()}\n")
    with open(os.path.splitext(args.out)[0] + ".loss.json", "w") as f:
        json.dump(trace, f)
    print("layer norms:", " ".join(f"{n:.6f}" for n in norms))


if __name__ == "__main__":
    sys.exit(main())
