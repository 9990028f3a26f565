"""Regenerates the binary fixtures in this directory (numpy >= 1.20)."""
import json

import numpy as np


def npy_fixtures():
    np.save("f32_2x3.npy", np.arange(1, 7, dtype="<f4").reshape(2, 3))
    np.save("f64_3x2_fortran.npy",
            np.asfortranarray(np.array([[1.5, -2.0], [3.25, 4.0], [0.0, 1e-3]], dtype="<f8")))
    np.save("f64_1d.npy", np.array([1.0, 2.0], dtype="<f8"))
    np.save("i32_2x2.npy", np.zeros((2, 2), dtype="<i4"))
    np.save("f64_nan.npy", np.array([[1.0, np.nan]], dtype="<f8"))
    np.save("f32_1x1.npy", np.array([[0.5]], dtype="<f4"))
    a = np.random.default_rng(3).standard_normal((4, 5))
    np.save("f64_4x5_random.npy", a)
    np.savetxt("f64_4x5_random.txt", a, fmt="%.17g")


# COCO compressed RLE, written out longhand.
def rle_string(counts):
    out = []
    for i, c in enumerate(counts):
        x = c - counts[i - 2] if i > 1 else c
        more = True
        while more:
            ch = x & 0x1F
            x >>= 5
            more = not ((x == 0 and not ch & 0x10) or (x == -1 and ch & 0x10))
            if more:
                ch |= 0x20
            out.append(chr(ch + 48))
    return "".join(out)


def rle_counts_from_string(s):
    counts, p = [], 0
    while p < len(s):
        x, k, more = 0, 0, True
        while more:
            c = ord(s[p]) - 48
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            p += 1
            k += 1
            if not more and c & 0x10:
                x |= -1 << (5 * k)
        if len(counts) > 1:
            x += counts[-2]
        counts.append(x)
    return counts


def counts_of(mask):
    flat = mask.flatten(order="F")
    counts, cur, run = [], 0, 0
    for b in flat:
        if b != cur:
            counts.append(run)
            cur, run = b, 0
        run += 1
    counts.append(run)
    return counts


def pad_fixture():
    w, h = 448, 336
    # The sample water string is cut short. Its prefix settles into a
    # per-column 183/153 split, which is continued to the last column.
    water = rle_counts_from_string("k5d4L5000000100000001000100000000000000")
    while sum(water) < w * h:
        water.append(min(water[-2], w * h - sum(water)))
    m = np.zeros(h * w, dtype=np.uint8)
    pos, val = 0, 0
    for c in water:
        m[pos:pos + c] = val
        pos += c
        val ^= 1
    water_mask = m.reshape((h, w), order="F")
    assert counts_of(water_mask) == water

    cliff_box = [-0.064117431640625, 0.34404754638671875, 447.9346005859375, 182.572509765625]
    ys, xs = np.mgrid[0:h, 0:w]
    x1, y1, x2, y2 = max(cliff_box[0], 0), max(cliff_box[1], 0), cliff_box[2], cliff_box[3]
    cliff_mask = ((xs + 0.5 >= x1) & (xs + 0.5 <= x2) & (ys + 0.5 >= y1) & (ys + 0.5 <= y2)).astype(np.uint8)

    record = {
        "image_id": "00000/00000030.jpg",
        "size": [w, h],
        "caption": "a canyon wall reflects the water on a sunny day in utah.",
        "labels": [
            {"tag": "water",
             "bbox": [-0.0003204345703125, 182.57894897460938, 447.99951171875, 335.67926025390625],
             "rle_mask": rle_string(water)},
            {"tag": "cliff", "bbox": cliff_box, "rle_mask": rle_string(counts_of(cliff_mask))},
        ],
    }
    with open("pad_sample.json", "w") as f:
        json.dump(record, f, indent=2)
        f.write("\n")
    with open("pad_sample_stats.txt", "w") as f:
        f.write(f"water_pixels {int(water_mask.sum())}\n")
        f.write(f"cliff_pixels {int(cliff_mask.sum())}\n")
        f.write(f"water_counts_head {' '.join(map(str, water[:6]))}\n")


if __name__ == "__main__":
    npy_fixtures()
    pad_fixture()
