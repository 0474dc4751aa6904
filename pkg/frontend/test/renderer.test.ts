import { describe, expect, it } from "vitest";

import type { ModelDoc, Vec3 } from "../src/protocol.js";
import {
  defaultCamera,
  dragDelta,
  elementEdges,
  pick,
  project,
  segmentDistance,
  viewFrame,
} from "../src/renderer.js";
import { alphaToSlider, sliderToAlpha } from "../src/controls.js";

const W = 800;
const H = 600;

describe("projection", () => {
  it("maps the camera target to the canvas center", () => {
    const cam = defaultCamera();
    const q = project(cam, cam.target, W, H);
    expect(q.x).toBeCloseTo(W / 2, 6);
    expect(q.y).toBeCloseTo(H / 2, 6);
    expect(q.depth).toBeCloseTo(cam.distance, 9);
  });

  it("has an orthonormal view frame", () => {
    const cam = defaultCamera();
    cam.yaw = 1.234;
    cam.pitch = -0.4;
    const { forward, right, up } = viewFrame(cam);
    const norm = (v: Vec3) => Math.hypot(...v);
    const dot = (a: Vec3, b: Vec3) => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    for (const v of [forward, right, up]) expect(norm(v)).toBeCloseTo(1, 12);
    expect(dot(forward, right)).toBeCloseTo(0, 12);
    expect(dot(forward, up)).toBeCloseTo(0, 12);
    expect(dot(right, up)).toBeCloseTo(0, 12);
  });

  it("moves points right on screen when displaced along the right vector", () => {
    const cam = defaultCamera();
    const { right } = viewFrame(cam);
    const base = project(cam, cam.target, W, H);
    const shifted = project(
      cam,
      [cam.target[0] + right[0], cam.target[1] + right[1], cam.target[2] + right[2]],
      W,
      H,
    );
    expect(shifted.x).toBeGreaterThan(base.x);
    expect(shifted.y).toBeCloseTo(base.y, 6);
  });
});

describe("camera-parallel dragging", () => {
  it("round-trips a pixel displacement at the drag depth", () => {
    const cam = defaultCamera();
    cam.yaw = 0.7;
    cam.pitch = 0.3;
    const point: Vec3 = [1.5, -0.5, 2.0];
    const q = project(cam, point, W, H);
    const delta = dragDelta(cam, q.depth, 24, -13);
    const moved: Vec3 = [
      point[0] + delta[0],
      point[1] + delta[1],
      point[2] + delta[2],
    ];
    const q2 = project(cam, moved, W, H);
    expect(q2.x - q.x).toBeCloseTo(24, 6);
    expect(q2.y - q.y).toBeCloseTo(-13, 6);
    // the plane is camera-parallel: depth is unchanged
    expect(q2.depth).toBeCloseTo(q.depth, 9);
  });
});

function pickModel(): ModelDoc {
  return {
    nodes: [
      { id: 0, pos: [0, 0, 0], fixed: true },
      { id: 1, pos: [4, 0, 0], fixed: false },
      { id: 2, pos: [0, 4, 0], fixed: false },
    ],
    elements: [
      { id: 7, kind: "line", nodes: [0, 1], role: "functional", weight: 1, power: 2 },
      { id: 8, kind: "triangle", nodes: [0, 1, 2], role: "elastic", stiffness: 50 },
    ],
    loads: [],
    solver: {
      method: "three_term",
      alpha: 0.2,
      damping: 0.98,
      constraint_relax: 0.5,
      max_steps: 100,
      grad_tol: 1e-3,
      residual_tol: 1e-6,
    },
  };
}

describe("picking", () => {
  const model = pickModel();
  const positions = new Map<number, Vec3>(
    model.nodes.map((n) => [n.id, n.pos]),
  );
  const cam = defaultCamera();
  cam.target = [1.5, 1.5, 0];
  cam.distance = 12;

  it("selects the node under the cursor", () => {
    const q = project(cam, [4, 0, 0], W, H);
    const hit = pick(cam, model, positions, q.x + 2, q.y - 2, W, H);
    expect(hit).toEqual({ kind: "node", id: 1 });
  });

  it("falls back to the nearest element edge", () => {
    const qa = project(cam, [0, 0, 0], W, H);
    const qb = project(cam, [4, 0, 0], W, H);
    const hit = pick(
      cam,
      model,
      positions,
      (qa.x + qb.x) / 2,
      (qa.y + qb.y) / 2,
      W,
      H,
    );
    expect(hit?.kind).toBe("element");
  });

  it("returns null away from everything", () => {
    expect(pick(cam, model, positions, 2, 2, W, H)).toBeNull();
  });

  it("computes point-segment distance", () => {
    expect(segmentDistance(0, 5, -10, 0, 10, 0)).toBeCloseTo(5, 12);
    expect(segmentDistance(20, 0, -10, 0, 10, 0)).toBeCloseTo(10, 12);
  });

  it("expands elements into their wireframe edges", () => {
    expect(elementEdges(model.elements[0])).toEqual([[0, 1]]);
    expect(elementEdges(model.elements[1]).length).toBe(3);
  });
});

describe("step-factor slider mapping", () => {
  it("is logarithmic over 1e-4..1", () => {
    expect(sliderToAlpha(0)).toBeCloseTo(1e-4, 12);
    expect(sliderToAlpha(300)).toBeCloseTo(1, 12);
    expect(sliderToAlpha(150)).toBeCloseTo(1e-2, 12);
  });

  it("round-trips representative values", () => {
    for (const alpha of [1e-4, 1e-3, 0.05, 0.2, 1]) {
      expect(sliderToAlpha(alphaToSlider(alpha))).toBeCloseTo(alpha, 6);
    }
  });
});
