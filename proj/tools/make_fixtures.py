#!/usr/bin/env python3
"""Regenerates the fixture scenes and camera paths under assets/.

The files are committed; this script documents how they were made and keeps the numbers
(pixel footprints, pan rates) reproducible.
"""
import json
import math
import os

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "assets")


def write(name, text):
    with open(os.path.join(OUT, name), "w") as f:
        f.write(text)


def dump_json(name, obj):
    write(name, json.dumps(obj, indent=2) + "\n")


class Mesh:
    def __init__(self):
        self.v = []
        self.groups = []  # (material, [quads or tris as index lists])

    def vert(self, p):
        self.v.append(p)
        return len(self.v)

    def face(self, material, pts):
        ids = [self.vert(p) for p in pts]
        if not self.groups or self.groups[-1][0] != material:
            self.groups.append((material, []))
        self.groups[-1][1].append(ids)

    def box(self, material, lo, hi):
        (x0, y0, z0), (x1, y1, z1) = lo, hi
        # Counter-clockwise seen from outside.
        self.face(material, [(x0, y1, z0), (x0, y1, z1), (x1, y1, z1), (x1, y1, z0)])  # top
        self.face(material, [(x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)])  # +z
        self.face(material, [(x1, y0, z0), (x0, y0, z0), (x0, y1, z0), (x1, y1, z0)])  # -z
        self.face(material, [(x1, y0, z1), (x1, y0, z0), (x1, y1, z0), (x1, y1, z1)])  # +x
        self.face(material, [(x0, y0, z0), (x0, y0, z1), (x0, y1, z1), (x0, y1, z0)])  # -x

    def triangles(self):
        return sum(len(f) - 2 for _, faces in self.groups for f in faces)

    def obj(self, header):
        lines = [f"# {line}" for line in header]
        lines.append(f"# {self.triangles()} triangles")
        lines += [f"v {x:.6g} {y:.6g} {z:.6g}" for x, y, z in self.v]
        for material, faces in self.groups:
            lines.append(f"usemtl {material}")
            lines += ["f " + " ".join(str(i) for i in f) for f in faces]
        return "\n".join(lines) + "\n"


def tri_room():
    m = Mesh()
    m.face("floor", [(-8, 0, -6), (-8, 0, 6), (8, 0, 6), (8, 0, -6)])
    m.face("wall_back", [(-8, 0, -6), (8, 0, -6), (8, 5, -6), (-8, 5, -6)])
    m.face("wall_left", [(-8, 0, 6), (-8, 0, -6), (-8, 5, -6), (-8, 5, 6)])
    m.box("box_red", (-3.0, 0.0, -3.5), (-1.0, 1.6, -1.5))
    m.box("box_blue", (1.2, 0.0, -2.4), (2.2, 2.8, -1.4))
    m.box("box_red", (2.5, 0.0, 1.0), (3.5, 0.8, 2.0))
    # A row of thin columns in front of the back wall.
    for x in (-6.0, -4.5, -0.2, 3.4, 5.5):
        m.box("column", (x - 0.2, 0.0, -4.6), (x + 0.2, 3.6, -4.2))
    write("tri-room.obj", m.obj(["tri-room: floor, back wall, left wall, three boxes and a row of columns"]))

    materials = {
        "floor": [0.75, 0.72, 0.68],
        "wall_back": [0.7, 0.75, 0.8],
        "wall_left": [0.8, 0.7, 0.6],
        "box_red": [0.8, 0.25, 0.2],
        "box_blue": [0.25, 0.35, 0.8],
        "column": [0.85, 0.85, 0.8],
    }
    base = {
        "default_albedo": [0.8, 0.8, 0.8],
        "materials": materials,
        "background": [0.05, 0.06, 0.1],
        "camera": {"vertical_fov_deg": 60.0, "near": 0.05, "far": 1000.0},
    }
    two = dict(base, lights=[
        {"position": [3.0, 4.5, 3.0], "intensity": [2.6, 2.5, 2.3]},
        {"position": [-4.5, 2.2, 1.5], "intensity": [1.6, 1.7, 2.0]},
    ])
    dump_json("tri-room.json", two)
    three = dict(base, lights=two["lights"] + [{"position": [0.5, 4.8, -4.5], "intensity": [1.2, 1.0, 0.8]}])
    dump_json("tri-room-3.json", three)

    # Orbit: 240 frames around the room centre, a keyframe every 4 frames.
    keys = []
    for f in range(0, 241, 4):
        a = math.radians(-35 + 70 * f / 240)
        keys.append({"frame": f, "position": [9 * math.sin(a), 3.5 + 0.8 * math.sin(2 * a), 9 * math.cos(a) - 1.5],
                     "target": [0.0, 1.0, -1.5], "up": [0, 1, 0]})
    dump_json("tri-room-orbit.json", {"keyframes": keys})

    # Sideways strafe along the room with a slow yaw; a keyframe every frame keeps both rates constant.
    keys = []
    for f in range(0, 121):
        a = math.radians(-8.0 + 0.13 * f)
        eye = [-4.0 + 0.067 * f, 2.2, 5.0]
        keys.append({"frame": f, "position": eye,
                     "target": [eye[0] + math.sin(a), 1.4, eye[2] - math.cos(a)], "up": [0, 1, 0]})
    dump_json("tri-room-pan.json", {"keyframes": keys})

    dump_json("tri-room-static.json", {"keyframes": [
        {"frame": 0, "position": [4.0, 3.5, 7.5], "target": [-0.5, 1.0, -1.5], "up": [0, 1, 0]}]})


def shadow_plane():
    m = Mesh()
    m.face("ground", [(-100, 0, -100), (-100, 0, 100), (100, 0, 100), (100, 0, -100)])
    # Occluder above the camera, facing down: shades the ground for x < -1 from the overhead light.
    m.face("slab", [(-100, 15, -100), (-0.5, 15, -100), (-0.5, 15, 100), (-100, 15, 100)])
    write("shadow-plane.obj", m.obj(["shadow-plane: ground plane and an overhead occluder the camera never sees"]))
    dump_json("shadow-plane.json", {
        "materials": {"ground": [0.7, 0.7, 0.7], "slab": [0.5, 0.5, 0.5]},
        "background": [0.0, 0.0, 0.0],
        "lights": [
            {"position": [0.0, 30.0, 0.0], "intensity": [2.5, 2.5, 2.5]},
            {"position": [50.0, 30.0, 0.0], "intensity": [1.5, 1.5, 1.5]},
        ],
        "camera": {"vertical_fov_deg": 60.0, "near": 0.05, "far": 1000.0},
    })

    # Top-down camera at height 10 translating towards -x by a whole number of pixels per frame,
    # measured at a 90-pixel display height.
    height = 10.0
    footprint = 2 * height * math.tan(math.radians(30)) / 90
    for name, px in (("shadow-plane-pan.json", 2), ("shadow-plane-fast.json", 6)):
        frames = 60
        x0 = 4.0
        x1 = x0 - px * footprint * frames
        dump_json(name, {"keyframes": [
            {"frame": 0, "position": [x0, height, 0.0], "target": [x0, 0.0, 0.0], "up": [0, 0, -1]},
            {"frame": frames, "position": [x1, height, 0.0], "target": [x1, 0.0, 0.0], "up": [0, 0, -1]},
        ]})


def configs():
    dump_json("default.json", {
        "scene": "tri-room.obj", "lights": "tri-room.json", "trajectory": "tri-room-orbit.json",
        "display": [320, 180], "guard": [16, 9], "x_max": 2,
        "delay_up_ms": 27.5, "delay_down_ms": 27.5, "jitter_ms": 0.0, "loss": 0.0, "seed": 1,
        "frame_time_ms": 11.1, "frames": 240, "output": "../out/default", "metrics": True,
    })


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    tri_room()
    shadow_plane()
    configs()
