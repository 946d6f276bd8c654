"""Trade off noise against motion blur by re-integrating one event stream.

Because events carry microsecond timestamps, the exposure window is a
post-hoc choice: the same recording can be summed over 5 ms, 25 ms, or
100 ms windows.  Short windows freeze the keyhole flicker but are sparse;
long windows are dense but smear the orbiting anomaly into an arc.  Each
window length is written out as a sequence of 8-bit PGM images.

Run: python3 demos/exposure_windows.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from evmelt import framing
from evmelt.events import SensorGeometry
from evmelt.pgmio import write_pgm
from evmelt.scenes import SceneSpec, render_scene
from evmelt.sensor import SensorModel, simulate

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo_out/exposure_windows")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    print("simulating 0.5 s of a melt pool with an orbiting anomaly...")
    video, _ = render_scene(
        SceneSpec("meltpool", {"anomaly": 1}), SensorGeometry(128, 96), 500_000, 1000
    )
    stream = simulate(video, SensorModel())
    print(f"  {len(stream)} events")

    stride = 25_000
    for window in (5_000, 25_000, 100_000):
        frames = framing.frame_sequence(stream, stride, framing.boxcar(window))
        active = [np.count_nonzero(f.values) for f in frames]
        for i, f in enumerate(frames):
            write_pgm(OUT / f"win{window // 1000:03d}ms_{i:03d}.pgm", framing.to_image(f))
        print(
            f"  window {window / 1000:5.0f} ms: {len(frames)} frames, "
            f"mean active pixels {np.mean(active):.0f}"
        )
    print(f"images written to {OUT}/")


if __name__ == "__main__":
    main()
