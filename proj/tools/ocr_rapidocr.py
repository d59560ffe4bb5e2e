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
"""OCR adapter for capcheck's external engine protocol.

Usage: ocr_rapidocr.py IMAGE
Prints a JSON list of {"text", "confidence", "bbox": [x0, y0, x1, y1]}.
"""

import json
import sys


def main():
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    try:
        from rapidocr_onnxruntime import RapidOCR
    except ImportError:
        print("rapidocr_onnxruntime is not installed", file=sys.stderr)
        return 3

    result, _ = RapidOCR()(sys.argv[1])
    regions = []
    for box, text, score in result or []:
        xs = [p[0] for p in box]
        ys = [p[1] for p in box]
        regions.append({
            "text": text,
            "confidence": float(score),
            "bbox": [float(min(xs)), float(min(ys)), float(max(xs)), float(max(ys))],
        })
    json.dump(regions, sys.stdout, ensure_ascii=False)
    return 0


if __name__ == "__main__":
    sys.exit(main())
