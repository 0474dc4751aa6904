// Wire types for the steering session: one JSON object per WebSocket frame,
// commands carry a "cmd" discriminator, server events an "event" one.

export type Vec3 = [number, number, number];

export interface NodeDoc {
  id: number;
  pos: Vec3;
  fixed: boolean;
}

export interface ElementDoc {
  id: number;
  kind: "line" | "triangle" | "tetrahedron";
  nodes: number[];
  role: "functional" | "elastic" | "constrained";
  weight?: number;
  power?: number;
  stiffness?: number;
  rest_metric?: number[][];
  target?: number;
}

export interface ModelDoc {
  nodes: NodeDoc[];
  elements: ElementDoc[];
  loads: { node: number; force: Vec3 }[];
  solver: {
    method: string;
    alpha: number;
    damping: number;
    constraint_relax: number;
    max_steps: number;
    grad_tol: number;
    residual_tol: number;
  };
}

export type ParamName = "alpha" | "damping" | "constraint_relax";

export type Command =
  | { cmd: "load_model"; model: ModelDoc }
  | { cmd: "start" }
  | { cmd: "pause" }
  | { cmd: "step"; count: number }
  | { cmd: "set_param"; name: ParamName; value: number }
  | { cmd: "set_weight"; element: number; value: number }
  | { cmd: "set_target"; element: number; value: number }
  | { cmd: "move_fixed_node"; node: number; pos: Vec3 }
  | { cmd: "randomize"; seed: number; range?: number }
  | { cmd: "subscribe"; every: number }
  | { cmd: "snapshot" };

export interface StateEvent {
  event: "state";
  step: number;
  pi?: number;
  grad_norm: number;
  residual_norm: number;
  alpha: number;
  positions: Vec3[]; // free nodes, ascending node id
}

export interface AckEvent {
  event: "ack";
  command: string;
  step: number;
}

export interface ErrorEvent {
  event: "error";
  message: string;
  command?: string;
}

export interface ConvergedEvent {
  event: "converged";
  step: number;
}

export interface ModelLoadedEvent {
  event: "model_loaded";
  counts: Record<string, unknown>;
  model: ModelDoc;
}

export interface HelloEvent {
  event: "hello";
  version: number;
}

export type ServerEvent =
  | StateEvent
  | AckEvent
  | ErrorEvent
  | ConvergedEvent
  | ModelLoadedEvent
  | HelloEvent;

const EVENT_KINDS = new Set([
  "state",
  "ack",
  "error",
  "converged",
  "model_loaded",
  "hello",
]);

export function parseEvent(raw: string): ServerEvent {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    throw new Error(`not JSON: ${raw.slice(0, 80)}`);
  }
  if (typeof data !== "object" || data === null) {
    throw new Error("event frame is not an object");
  }
  const kind = (data as { event?: unknown }).event;
  if (typeof kind !== "string" || !EVENT_KINDS.has(kind)) {
    throw new Error(`unknown event kind: ${String(kind)}`);
  }
  return data as ServerEvent;
}

export function encodeCommand(command: Command): string {
  return JSON.stringify(command);
}

// Small builders so call sites stay typo-proof.
export const commands = {
  loadModel: (model: ModelDoc): Command => ({ cmd: "load_model", model }),
  start: (): Command => ({ cmd: "start" }),
  pause: (): Command => ({ cmd: "pause" }),
  step: (count = 1): Command => ({ cmd: "step", count }),
  setParam: (name: ParamName, value: number): Command => ({
    cmd: "set_param",
    name,
    value,
  }),
  setWeight: (element: number, value: number): Command => ({
    cmd: "set_weight",
    element,
    value,
  }),
  setTarget: (element: number, value: number): Command => ({
    cmd: "set_target",
    element,
    value,
  }),
  moveFixedNode: (node: number, pos: Vec3): Command => ({
    cmd: "move_fixed_node",
    node,
    pos,
  }),
  randomize: (seed: number, range?: number): Command =>
    range === undefined
      ? { cmd: "randomize", seed }
      : { cmd: "randomize", seed, range },
  subscribe: (every: number): Command => ({ cmd: "subscribe", every }),
  snapshot: (): Command => ({ cmd: "snapshot" }),
};
