// Client-side session mirror: the latest state event, the model document and
// a rolling history buffer. Physics lives on the server; everything here can
// be rebuilt from a snapshot plus the event stream.

import type {
  ModelDoc,
  ServerEvent,
  StateEvent,
  Vec3,
} from "./protocol.js";

export interface HistoryPoint {
  step: number;
  pi: number | null;
  gradNorm: number;
  residualNorm: number;
  alpha: number;
}

export const HISTORY_CAPACITY = 5000;

export class ViewState {
  model: ModelDoc | null = null;
  latest: StateEvent | null = null;
  converged: number | null = null;
  selectedElement: number | null = null;
  selectedNode: number | null = null;
  pendingCommands = 0;
  lastError: string | null = null;

  private buffer: HistoryPoint[] = [];
  private dropped = 0;

  get history(): readonly HistoryPoint[] {
    return this.buffer;
  }

  get droppedPoints(): number {
    return this.dropped;
  }

  commandSent(): void {
    this.pendingCommands += 1;
  }

  clearHistory(): void {
    this.buffer = [];
    this.dropped = 0;
  }

  apply(event: ServerEvent): void {
    switch (event.event) {
      case "state": {
        this.latest = event;
        this.buffer.push({
          step: event.step,
          pi: event.pi ?? null,
          gradNorm: event.grad_norm,
          residualNorm: event.residual_norm,
          alpha: event.alpha,
        });
        if (this.buffer.length > HISTORY_CAPACITY) {
          this.buffer.splice(0, this.buffer.length - HISTORY_CAPACITY);
          this.dropped += 1;
        }
        break;
      }
      case "model_loaded":
        this.model = event.model;
        this.converged = null;
        break;
      case "converged":
        this.converged = event.step;
        break;
      case "ack":
        this.pendingCommands = Math.max(0, this.pendingCommands - 1);
        this.lastError = null;
        break;
      case "error":
        this.pendingCommands = Math.max(0, this.pendingCommands - 1);
        this.lastError = event.message;
        break;
      case "hello":
        break;
    }
  }

  /** Free-node ids in ascending order; matches the positions array layout. */
  freeNodeIds(): number[] {
    if (!this.model) return [];
    return this.model.nodes
      .filter((n) => !n.fixed)
      .map((n) => n.id)
      .sort((a, b) => a - b);
  }

  /** Current coordinates per node id: fixed from the model document, free
   * from the latest state event (model positions until one arrives). */
  positionsById(): Map<number, Vec3> {
    const out = new Map<number, Vec3>();
    if (!this.model) return out;
    for (const node of this.model.nodes) out.set(node.id, node.pos);
    if (this.latest) {
      const free = this.freeNodeIds();
      this.latest.positions.forEach((pos, i) => {
        if (i < free.length) out.set(free[i], pos);
      });
    }
    return out;
  }

  /** Stride-decimated view for plotting; raw points stay in the buffer. */
  decimated(maxPoints: number): HistoryPoint[] {
    if (this.buffer.length <= maxPoints) return [...this.buffer];
    const stride = Math.ceil(this.buffer.length / maxPoints);
    const out: HistoryPoint[] = [];
    for (let i = 0; i < this.buffer.length; i += stride) out.push(this.buffer[i]);
    const last = this.buffer[this.buffer.length - 1];
    if (out[out.length - 1] !== last) out.push(last);
    return out;
  }
}

/** Check buffered values against a server history CSV
 * (step,pi,grad_norm,residual_norm,alpha). Numbers compare exactly: both
 * sides are shortest-round-trip decimal for the same doubles. */
export function historyMatchesCsv(
  history: readonly HistoryPoint[],
  csv: string,
  samples = 10,
): boolean {
  const lines = csv.trim().split("\n");
  if (lines[0] !== "step,pi,grad_norm,residual_norm,alpha") return false;
  const byStep = new Map<number, HistoryPoint>();
  for (const point of history) byStep.set(point.step, point);
  const rows = lines.slice(1).filter((line) => byStep.has(parseInt(line, 10)));
  if (rows.length === 0) return false;
  const stride = Math.max(1, Math.floor(rows.length / samples));
  for (let i = 0; i < rows.length; i += stride) {
    const [step, pi, grad, res, alpha] = rows[i].split(",");
    const point = byStep.get(Number(step))!;
    if (pi === "" ? point.pi !== null : Number(pi) !== point.pi) return false;
    if (Number(grad) !== point.gradNorm) return false;
    if (Number(res) !== point.residualNorm) return false;
    if (Number(alpha) !== point.alpha) return false;
  }
  return true;
}
