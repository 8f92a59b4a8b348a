"""Derive biorthogonal spline filter tables from the CDF construction.

Prints a Python literal for ``wavecast.wavelet.filters``. Run once; the output
is pasted into the module and the invariant tests pin it.
"""
import itertools
from math import comb, sqrt

import numpy as np

NAMES = [(1, 1), (1, 5), (2, 8), (3, 9), (6, 8)]


def _poly_from_laurent_y(coeffs):
    # y = (2 - z - 1/z)/4 as a polynomial in z (shifted by one power)
    out = np.array([1.0])
    for c in coeffs:
        pass
    return out


def _ypow(k):
    base = np.array([-0.25, 0.5, -0.25])
    out = np.array([1.0])
    for _ in range(k):
        out = np.convolve(out, base)
    return out


def _binom_poly(n):
    return np.array([comb(n, k) for k in range(n + 1)], dtype=float)


def _centered_add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    off = (len(a) - len(b)) // 2
    out[off:off + len(b)] += b
    return out


def spline_pair(nr, nd):
    k_tot = (nr + nd) // 2
    rec = _binom_poly(nr)
    dual = np.array([0.0])
    for k in range(k_tot):
        dual = _centered_add(dual, comb(k_tot - 1 + k, k) * _ypow(k))
    dec = np.convolve(_binom_poly(nd), dual)
    dec = np.trim_zeros(dec)
    return rec * sqrt(2) / rec.sum(), dec * sqrt(2) / dec.sum()


def split_pair(nr, nd, want_rec_len):
    """Non-spline CDF variant: distribute the roots of the half-band polynomial."""
    k_tot = (nr + nd) // 2
    p = [comb(k_tot - 1 + k, k) for k in range(k_tot)]
    yroots = np.roots(p[::-1])
    candidates = []
    idx = range(len(yroots))
    for n_take in range(len(yroots) + 1):
        for take in itertools.combinations(idx, n_take):
            sel = yroots[list(take)]
            # keep conjugate pairs together
            if not np.allclose(np.sort_complex(sel), np.sort_complex(np.conj(sel))):
                continue
            rec = _binom_poly(nr)
            for y in sel:
                rec = np.convolve(rec, np.array([-0.25, 0.5 - y, -0.25]))
            rest = [yroots[i] for i in idx if i not in take]
            dec = _binom_poly(nd)
            for y in rest:
                dec = np.convolve(dec, np.array([-0.25, 0.5 - y, -0.25]))
            rec, dec = np.real(rec), np.real(dec)
            if len(rec) != want_rec_len:
                continue
            candidates.append((rec * sqrt(2) / rec.sum(), dec * sqrt(2) / dec.sum()))
    return candidates


def place(rec, dec):
    length = max(len(rec), len(dec))
    length += length % 2
    def pad(f, center):
        out = np.zeros(length)
        start = int(round(center - (len(f) - 1) / 2))
        out[start:start + len(f)] = f
        return out
    if len(dec) % 2:
        dec_lo, rec_lo = pad(dec, length / 2), pad(rec, length / 2 - 1)
    else:
        dec_lo, rec_lo = pad(dec, (length - 1) / 2), pad(rec, (length - 1) / 2)
    sign = np.array([(-1.0) ** n for n in range(length)])
    dec_hi = -sign * rec_lo
    rec_hi = sign * dec_lo
    return dec_lo, dec_hi, rec_lo, rec_hi


def main():
    try:
        import pywt
    except ImportError:
        pywt = None
    print("_TABLES = {")
    for nr, nd in NAMES:
        if nr == 6:
            cands = split_pair(nr, nd, 11)
        else:
            cands = [spline_pair(nr, nd)]
        name = f"bior{nr}.{nd}"
        chosen = None
        for rec, dec in cands:
            bank = place(rec, dec)
            if pywt is None:
                chosen = bank
                break
            ref = pywt.Wavelet(name)
            err = max(np.max(np.abs(np.asarray(getattr(ref, a)) - b))
                      for a, b in zip(["dec_lo", "dec_hi", "rec_lo", "rec_hi"], bank))
            print(f"    # {name}: max deviation from published table {err:.2e}")
            if err < 1e-9:
                chosen = bank
                break
        assert chosen is not None, name
        print(f'    "{name}": (')
        for arr in chosen:
            body = ", ".join(repr(float(v)) for v in arr)
            print(f"        ({body}),")
        print("    ),")
    print("}")


if __name__ == "__main__":
    main()
