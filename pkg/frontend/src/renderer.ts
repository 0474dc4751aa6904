// Canvas wireframe renderer with an orbit camera. No scene-graph library:
// the models are a few hundred edges, immediate drawing each frame is fine.

import type { ElementDoc, ModelDoc, Vec3 } from "./protocol.js";

export interface Camera {
  target: Vec3;
  distance: number;
  yaw: number; // radians around +z
  pitch: number; // radians above the xy plane
  focal: number; // pixels
}

export function defaultCamera(): Camera {
  return { target: [0, 0, 0], distance: 25, yaw: 0.8, pitch: 0.5, focal: 600 };
}

function sub(a: Vec3, b: Vec3): Vec3 {
  return [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
}

function dot(a: Vec3, b: Vec3): number {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/** Orthonormal view frame: forward (camera to target), right, up. */
export function viewFrame(cam: Camera): { forward: Vec3; right: Vec3; up: Vec3 } {
  const cp = Math.cos(cam.pitch);
  const forward: Vec3 = [
    -cp * Math.cos(cam.yaw),
    -cp * Math.sin(cam.yaw),
    -Math.sin(cam.pitch),
  ];
  const right: Vec3 = [-Math.sin(cam.yaw), Math.cos(cam.yaw), 0];
  const up: Vec3 = [
    right[1] * forward[2] - right[2] * forward[1],
    right[2] * forward[0] - right[0] * forward[2],
    right[0] * forward[1] - right[1] * forward[0],
  ];
  return { forward, right, up };
}

export interface Projected {
  x: number;
  y: number;
  depth: number; // distance along the view direction, > 0 when visible
}

export function project(
  cam: Camera,
  point: Vec3,
  width: number,
  height: number,
): Projected {
  const { forward, right, up } = viewFrame(cam);
  const eye: Vec3 = [
    cam.target[0] - forward[0] * cam.distance,
    cam.target[1] - forward[1] * cam.distance,
    cam.target[2] - forward[2] * cam.distance,
  ];
  const rel = sub(point, eye);
  const depth = dot(rel, forward);
  const scale = cam.focal / Math.max(depth, 1e-6);
  return {
    x: width / 2 + dot(rel, right) * scale,
    y: height / 2 - dot(rel, up) * scale,
    depth,
  };
}

/** World displacement for a pixel drag, confined to the camera-parallel
 * plane through a point at the given view depth. */
export function dragDelta(
  cam: Camera,
  depth: number,
  dxPixels: number,
  dyPixels: number,
): Vec3 {
  const { right, up } = viewFrame(cam);
  const scale = depth / cam.focal;
  return [
    (right[0] * dxPixels - up[0] * dyPixels) * scale,
    (right[1] * dxPixels - up[1] * dyPixels) * scale,
    (right[2] * dxPixels - up[2] * dyPixels) * scale,
  ];
}

const EDGE_SLOTS: Record<string, [number, number][]> = {
  line: [[0, 1]],
  triangle: [
    [0, 1],
    [1, 2],
    [2, 0],
  ],
  tetrahedron: [
    [0, 1],
    [0, 2],
    [0, 3],
    [1, 2],
    [1, 3],
    [2, 3],
  ],
};

export function elementEdges(element: ElementDoc): [number, number][] {
  return EDGE_SLOTS[element.kind].map(([a, b]) => [
    element.nodes[a],
    element.nodes[b],
  ]);
}

export interface PickResult {
  kind: "node" | "element";
  id: number;
}

/** Nearest node within `radius` pixels, else nearest element edge. */
export function pick(
  cam: Camera,
  model: ModelDoc,
  positions: Map<number, Vec3>,
  sx: number,
  sy: number,
  width: number,
  height: number,
  radius = 10,
): PickResult | null {
  let best: PickResult | null = null;
  let bestDist = radius;
  for (const node of model.nodes) {
    const p = positions.get(node.id);
    if (!p) continue;
    const proj = project(cam, p, width, height);
    if (proj.depth <= 0) continue;
    const d = Math.hypot(proj.x - sx, proj.y - sy);
    if (d < bestDist) {
      bestDist = d;
      best = { kind: "node", id: node.id };
    }
  }
  if (best) return best;
  bestDist = radius;
  for (const element of model.elements) {
    for (const [a, b] of elementEdges(element)) {
      const pa = positions.get(a);
      const pb = positions.get(b);
      if (!pa || !pb) continue;
      const qa = project(cam, pa, width, height);
      const qb = project(cam, pb, width, height);
      if (qa.depth <= 0 || qb.depth <= 0) continue;
      const d = segmentDistance(sx, sy, qa.x, qa.y, qb.x, qb.y);
      if (d < bestDist) {
        bestDist = d;
        best = { kind: "element", id: element.id };
      }
    }
  }
  return best;
}

export function segmentDistance(
  px: number,
  py: number,
  ax: number,
  ay: number,
  bx: number,
  by: number,
): number {
  const vx = bx - ax;
  const vy = by - ay;
  const len2 = vx * vx + vy * vy;
  const t = len2 === 0 ? 0 : Math.max(0, Math.min(1, ((px - ax) * vx + (py - ay) * vy) / len2));
  return Math.hypot(px - (ax + t * vx), py - (ay + t * vy));
}

const ROLE_STYLE: Record<string, { width: number; color: string }> = {
  constrained: { width: 3.5, color: "#16324f" }, // struts drawn thick
  functional: { width: 1.2, color: "#c0392b" },
  elastic: { width: 1.6, color: "#2471a3" },
};

export class WireframeRenderer {
  readonly camera = defaultCamera();

  constructor(private canvas: HTMLCanvasElement) {}

  /** Draw the current scene; with no data the previous frame stays put. */
  draw(
    model: ModelDoc | null,
    positions: Map<number, Vec3>,
    selection: { node: number | null; element: number | null },
  ): void {
    if (!model) return;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    for (const element of model.elements) {
      const style = ROLE_STYLE[element.role];
      ctx.strokeStyle = element.id === selection.element ? "#e67e22" : style.color;
      ctx.lineWidth =
        element.id === selection.element ? style.width + 1.5 : style.width;
      for (const [a, b] of elementEdges(element)) {
        const pa = positions.get(a);
        const pb = positions.get(b);
        if (!pa || !pb) continue;
        const qa = project(this.camera, pa, width, height);
        const qb = project(this.camera, pb, width, height);
        if (qa.depth <= 0 || qb.depth <= 0) continue;
        ctx.beginPath();
        ctx.moveTo(qa.x, qa.y);
        ctx.lineTo(qb.x, qb.y);
        ctx.stroke();
      }
    }

    for (const node of model.nodes) {
      const p = positions.get(node.id);
      if (!p) continue;
      const q = project(this.camera, p, width, height);
      if (q.depth <= 0) continue;
      const selected = node.id === selection.node;
      ctx.fillStyle = selected ? "#e67e22" : node.fixed ? "#111111" : "#7f8c8d";
      if (node.fixed) {
        const r = selected ? 6 : 4.5;
        ctx.fillRect(q.x - r, q.y - r, 2 * r, 2 * r);
      } else {
        ctx.beginPath();
        ctx.arc(q.x, q.y, selected ? 4 : 2.5, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  }

  orbit(dxPixels: number, dyPixels: number): void {
    this.camera.yaw -= dxPixels * 0.008;
    this.camera.pitch = Math.max(
      -1.45,
      Math.min(1.45, this.camera.pitch + dyPixels * 0.008),
    );
  }

  zoom(factor: number): void {
    this.camera.distance = Math.max(1, Math.min(500, this.camera.distance * factor));
  }
}
