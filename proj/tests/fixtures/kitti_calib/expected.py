"""Expected values for the KITTI calibration fixture in this directory.

Parses the three text files without the library and prints the composed
quantities that test_kitti_io.cpp freezes.
Run: python3 tests/fixtures/kitti_calib/expected.py
"""
import os

import numpy as np

here = os.path.dirname(os.path.abspath(__file__))


def load(name):
    out = {}
    with open(os.path.join(here, name)) as f:
        for line in f:
            key, _, rest = line.partition(":")
            try:
                out[key.strip()] = np.array([float(x) for x in rest.split()])
            except ValueError:
                pass
    return out


velo = load("calib_velo_to_cam.txt")
cam = load("calib_cam_to_cam.txt")
imu = load("calib_imu_to_velo.txt")

T_cam_velo = np.eye(4)
T_cam_velo[:3, :3] = velo["R"].reshape(3, 3)
T_cam_velo[:3, 3] = velo["T"]
R_rect = np.eye(4)
R_rect[:3, :3] = cam["R_rect_00"].reshape(3, 3)
P = cam["P_rect_02"].reshape(3, 4)
M = P @ R_rect @ T_cam_velo

T_velo_imu = np.eye(4)
T_velo_imu[:3, :3] = imu["R"].reshape(3, 3)
T_velo_imu[:3, 3] = imu["T"]
# Navigation body axes are forward-right-down; the OXTS unit is forward-left-up.
T_velo_body = T_velo_imu @ np.diag([1.0, -1.0, -1.0, 1.0])

np.set_printoptions(precision=17)
print("lidar_projection =")
for row in M:
    print(" ".join("%.17g" % v for v in row))
print("body_to_lidar =")
for row in T_velo_body[:3]:
    print(" ".join("%.17g" % v for v in row))
x = np.array([12.0, -3.0, -1.2, 1.0])
y = M @ x
print("project (12, -3, -1.2) = %.17g %.17g %.17g" % (y[0] / y[2], y[1] / y[2], y[2]))
print("size =", cam["S_rect_02"])
