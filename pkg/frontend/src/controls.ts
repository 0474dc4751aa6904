// Control panel: step-factor slider (log scale), damping and relax fields,
// run/pause/step buttons, randomize, and editors for the current selection.
// Commands are emitted once per committed change (slider release, button
// click, apply), never per input event.

import { Command, ModelDoc, commands } from "./protocol.js";
import type { ViewState } from "./viewstate.js";

export const ALPHA_SLIDER_STEPS = 300;
const ALPHA_LOG_MIN = -4; // 1e-4
const ALPHA_LOG_MAX = 0; // 1

export function sliderToAlpha(position: number): number {
  const t = Math.max(0, Math.min(ALPHA_SLIDER_STEPS, position)) / ALPHA_SLIDER_STEPS;
  return Math.pow(10, ALPHA_LOG_MIN + t * (ALPHA_LOG_MAX - ALPHA_LOG_MIN));
}

export function alphaToSlider(alpha: number): number {
  const clamped = Math.max(1e-4, Math.min(1, alpha));
  const t = (Math.log10(clamped) - ALPHA_LOG_MIN) / (ALPHA_LOG_MAX - ALPHA_LOG_MIN);
  return Math.round(t * ALPHA_SLIDER_STEPS);
}

type Send = (command: Command) => void;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

export class ControlPanel {
  private alphaLabel = el("span", { class: "value" });
  private alphaSlider = el("input", {
    type: "range",
    min: "0",
    max: String(ALPHA_SLIDER_STEPS),
    step: "1",
  });
  private damping = el("input", { type: "number", step: "0.01", min: "0.01", max: "1" });
  private relax = el("input", { type: "number", step: "0.05", min: "0.05", max: "1" });
  private stepCount = el("input", { type: "number", value: "1", min: "1" });
  private seed = el("input", { type: "number", value: "42" });
  private status = el("div", { class: "status" });
  private errorBox = el("div", { class: "error" });
  private selectionBox = el("div", { class: "selection" });
  private badge = el("span", { class: "badge hidden" }, "converged");

  constructor(
    root: HTMLElement,
    private send: Send,
    private view: ViewState,
  ) {
    const row = (label: string, ...widgets: HTMLElement[]) => {
      const div = el("div", { class: "row" });
      div.append(el("label", {}, label), ...widgets);
      root.append(div);
      return div;
    };

    root.append(this.status, this.badge);

    row("step factor", this.alphaSlider, this.alphaLabel);
    this.alphaSlider.addEventListener("input", () => {
      this.alphaLabel.textContent = sliderToAlpha(
        Number(this.alphaSlider.value),
      ).toPrecision(3);
    });
    this.alphaSlider.addEventListener("change", () => {
      this.emit(commands.setParam("alpha", sliderToAlpha(Number(this.alphaSlider.value))));
    });

    row("damping", this.damping);
    this.damping.addEventListener("change", () => {
      this.emit(commands.setParam("damping", Number(this.damping.value)));
    });
    row("constraint relax", this.relax);
    this.relax.addEventListener("change", () => {
      this.emit(commands.setParam("constraint_relax", Number(this.relax.value)));
    });

    const run = el("button", {}, "run");
    const pause = el("button", {}, "pause");
    const step = el("button", {}, "step");
    run.addEventListener("click", () => this.emit(commands.start()));
    pause.addEventListener("click", () => this.emit(commands.pause()));
    step.addEventListener("click", () =>
      this.emit(commands.step(Math.max(1, Number(this.stepCount.value)))),
    );
    row("run", run, pause, step, this.stepCount);

    const randomize = el("button", {}, "randomize");
    randomize.addEventListener("click", () =>
      this.emit(commands.randomize(Number(this.seed.value))),
    );
    row("seed", this.seed, randomize);

    root.append(this.selectionBox, this.errorBox);
  }

  private emit(command: Command): void {
    this.view.commandSent();
    this.send(command);
  }

  /** Reflect server-side values without re-emitting commands. */
  refresh(): void {
    const latest = this.view.latest;
    if (latest) {
      this.alphaSlider.value = String(alphaToSlider(latest.alpha));
      this.alphaLabel.textContent = latest.alpha.toPrecision(3);
      this.status.textContent =
        `step ${latest.step}  |gradient| ${latest.grad_norm.toExponential(2)}` +
        (latest.pi !== undefined ? `  objective ${latest.pi.toPrecision(6)}` : "") +
        (latest.residual_norm > 0
          ? `  |residual| ${latest.residual_norm.toExponential(2)}`
          : "");
    }
    if (this.view.model) {
      this.damping.value = String(this.view.model.solver.damping);
      this.relax.value = String(this.view.model.solver.constraint_relax);
    }
    this.badge.classList.toggle("hidden", this.view.converged === null);
    this.errorBox.textContent = this.view.lastError ?? "";
    this.errorBox.classList.toggle("hidden", this.view.lastError === null);
    const pending = this.view.pendingCommands;
    this.status.classList.toggle("pending", pending > 0);
    this.renderSelection();
  }

  private renderSelection(): void {
    const box = this.selectionBox;
    box.textContent = "";
    const model = this.view.model;
    if (!model) return;
    if (this.view.selectedElement !== null) {
      const element = model.elements.find((e) => e.id === this.view.selectedElement);
      if (element) this.elementEditor(box, model, element.id);
    } else if (this.view.selectedNode !== null) {
      this.nodeEditor(box, model, this.view.selectedNode);
    } else {
      box.append(el("div", { class: "hint" }, "click a node or member to edit it"));
    }
  }

  private elementEditor(box: HTMLElement, model: ModelDoc, id: number): void {
    const element = model.elements.find((e) => e.id === id)!;
    box.append(el("div", {}, `member ${id} (${element.kind}, ${element.role})`));
    if (element.role === "functional") {
      const weight = el("input", { type: "number", step: "0.1", min: "0" });
      weight.value = String(element.weight ?? 0);
      const apply = el("button", {}, "set weight");
      apply.addEventListener("click", () => {
        this.emit(commands.setWeight(id, Number(weight.value)));
      });
      box.append(weight, apply);
    } else if (element.role === "constrained") {
      const target = el("input", { type: "number", step: "0.1", min: "0.01" });
      target.value = String(element.target ?? 1);
      const apply = el("button", {}, "set target");
      apply.addEventListener("click", () => {
        this.emit(commands.setTarget(id, Number(target.value)));
      });
      box.append(target, apply);
    }
  }

  private nodeEditor(box: HTMLElement, model: ModelDoc, id: number): void {
    const node = model.nodes.find((n) => n.id === id);
    if (!node) return;
    box.append(el("div", {}, `node ${id}${node.fixed ? " (fixed)" : ""}`));
    if (!node.fixed) return; // free nodes belong to the solver
    const inputs = node.pos.map((c) => {
      const input = el("input", { type: "number", step: "0.1" });
      input.value = String(c);
      return input;
    });
    const apply = el("button", {}, "move");
    apply.addEventListener("click", () => {
      this.emit(
        commands.moveFixedNode(id, [
          Number(inputs[0].value),
          Number(inputs[1].value),
          Number(inputs[2].value),
        ]),
      );
    });
    box.append(...inputs, apply);
  }
}
