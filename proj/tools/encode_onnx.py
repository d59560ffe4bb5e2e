# Copyright 2026 The capcheck Authors. All Rights Reserved.
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
"""Embeds one image with an ONNX vision encoder and prints the vector as JSON.

The model takes a float32 NCHW batch of one image and its first output is
the embedding. Preprocessing: composite over white, bicubic resize to the
square input resolution, scale to [0, 1], normalize per channel.
"""

import argparse
import json
import sys

import numpy as np
from PIL import Image

# CLIP statistics; most published image encoders use these or ImageNet's.
CLIP_MEAN = (0.48145466, 0.4578275, 0.40821073)
CLIP_STD = (0.26862954, 0.26130258, 0.27577711)


def load(path, resolution, mean, std):
    img = Image.open(path).convert("RGBA")
    canvas = Image.new("RGBA", img.size, (255, 255, 255, 255))
    img = Image.alpha_composite(canvas, img).convert("RGB")
    img = img.resize((resolution, resolution), Image.BICUBIC)
    x = np.asarray(img, dtype=np.float32) / 255.0
    x = (x - np.asarray(mean, dtype=np.float32)) / np.asarray(std, dtype=np.float32)
    return x.transpose(2, 0, 1)[None, ...]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--model", required=True)
    ap.add_argument("--resolution", type=int, required=True)
    ap.add_argument("--mean", type=float, nargs=3, default=CLIP_MEAN)
    ap.add_argument("--std", type=float, nargs=3, default=CLIP_STD)
    ap.add_argument("image")
    args = ap.parse_args()

    try:
        import onnxruntime as ort
    except ImportError:
        print("onnxruntime is not installed", file=sys.stderr)
        return 3

    sess = ort.InferenceSession(args.model, providers=["CPUExecutionProvider"])
    x = load(args.image, args.resolution, args.mean, args.std)
    out = sess.run(None, {sess.get_inputs()[0].name: x})[0]
    json.dump([float(v) for v in np.asarray(out, dtype=np.float64).reshape(-1)], sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
