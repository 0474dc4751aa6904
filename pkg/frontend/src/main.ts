// Application assembly: socket, view state, wireframe canvas, strip charts
// and the control panel. The render loop repaints only when something new
// arrived, so a stalled stream keeps the last frame on screen.

import { SteeringClient } from "./client.js";
import { GRAD_SERIES, PI_SERIES, drawSeries } from "./charts.js";
import { ControlPanel } from "./controls.js";
import { commands } from "./protocol.js";
import { WireframeRenderer, dragDelta, pick, project } from "./renderer.js";
import { ViewState } from "./viewstate.js";

const params = new URLSearchParams(location.search);
const wsUrl =
  params.get("ws") ?? `ws://${location.host || "127.0.0.1:8765"}/session`;

const view = new ViewState();
const canvas = document.getElementById("scene") as HTMLCanvasElement;
const piCanvas = document.getElementById("pi-chart") as HTMLCanvasElement;
const gradCanvas = document.getElementById("grad-chart") as HTMLCanvasElement;
const renderer = new WireframeRenderer(canvas);
const client = new SteeringClient(wsUrl);

let dirty = true;

client.onEvent = (event) => {
  view.apply(event);
  dirty = true;
};
client.onStatus = (connected) => {
  document.getElementById("conn")!.textContent = connected
    ? `connected to ${wsUrl}`
    : "disconnected, retrying";
  if (connected) client.send(commands.subscribe(10));
};

const panel = new ControlPanel(
  document.getElementById("panel")!,
  (command) => client.send(command),
  view,
);

// -- pointer interaction: orbit, zoom, select, drag fixed nodes ------------

let dragging: { node: number; depth: number; pos: [number, number, number] } | null =
  null;
let orbiting = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (e) => {
  lastX = e.offsetX;
  lastY = e.offsetY;
  const model = view.model;
  if (!model) return;
  const hit = pick(
    renderer.camera,
    model,
    view.positionsById(),
    e.offsetX,
    e.offsetY,
    canvas.width,
    canvas.height,
  );
  if (hit?.kind === "node") {
    view.selectedNode = hit.id;
    view.selectedElement = null;
    const node = model.nodes.find((n) => n.id === hit.id)!;
    if (node.fixed) {
      const pos = view.positionsById().get(hit.id)!;
      const depth = project(renderer.camera, pos, canvas.width, canvas.height).depth;
      dragging = { node: hit.id, depth, pos: [...pos] };
    }
  } else if (hit?.kind === "element") {
    view.selectedElement = hit.id;
    view.selectedNode = null;
  } else {
    view.selectedNode = null;
    view.selectedElement = null;
    orbiting = true;
  }
  dirty = true;
  canvas.setPointerCapture(e.pointerId);
});

canvas.addEventListener("pointermove", (e) => {
  const dx = e.offsetX - lastX;
  const dy = e.offsetY - lastY;
  lastX = e.offsetX;
  lastY = e.offsetY;
  if (dragging) {
    // drag in the camera-parallel plane through the node
    const delta = dragDelta(renderer.camera, dragging.depth, dx, dy);
    dragging.pos = [
      dragging.pos[0] + delta[0],
      dragging.pos[1] + delta[1],
      dragging.pos[2] + delta[2],
    ];
    const node = view.model?.nodes.find((n) => n.id === dragging!.node);
    if (node) node.pos = [...dragging.pos];
    dirty = true;
  } else if (orbiting && e.buttons) {
    renderer.orbit(dx, dy);
    dirty = true;
  }
});

canvas.addEventListener("pointerup", () => {
  if (dragging) {
    view.commandSent();
    client.send(commands.moveFixedNode(dragging.node, dragging.pos));
    dragging = null;
  }
  orbiting = false;
});

canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  renderer.zoom(e.deltaY > 0 ? 1.1 : 0.9);
  dirty = true;
});

// -- render loop ------------------------------------------------------------

function frame(): void {
  if (dirty) {
    dirty = false;
    renderer.draw(view.model, view.positionsById(), {
      node: view.selectedNode,
      element: view.selectedElement,
    });
    drawSeries(piCanvas, view.decimated(600), PI_SERIES);
    drawSeries(gradCanvas, view.decimated(600), GRAD_SERIES);
    panel.refresh();
  }
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
