// Thin WebSocket wrapper: sends typed commands, parses events, keeps a
// replayable command log from the acks, reconnects with a snapshot request
// so a reopened page rebuilds its view from the stream alone.

import {
  Command,
  ServerEvent,
  commands,
  encodeCommand,
  parseEvent,
} from "./protocol.js";

export interface LoggedCommand {
  step: number;
  command: Command;
}

export class SteeringClient {
  onEvent: (event: ServerEvent) => void = () => {};
  onStatus: (connected: boolean) => void = () => {};
  readonly log: LoggedCommand[] = [];

  private socket: WebSocket | null = null;
  private sent: Command[] = [];
  private closed = false;

  constructor(private url: string) {}

  connect(): void {
    this.closed = false;
    const socket = new WebSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.onStatus(true);
      this.send(commands.snapshot());
    };
    socket.onmessage = (msg) => {
      let event: ServerEvent;
      try {
        event = parseEvent(String(msg.data));
      } catch {
        return;
      }
      if (event.event === "ack") {
        const command = this.sent.shift();
        if (command) this.log.push({ step: event.step, command });
      } else if (event.event === "error") {
        this.sent.shift();
      }
      this.onEvent(event);
    };
    socket.onclose = () => {
      this.onStatus(false);
      this.sent = [];
      if (!this.closed) {
        setTimeout(() => this.connect(), 1000);
      }
    };
  }

  send(command: Command): boolean {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) return false;
    this.sent.push(command);
    this.socket.send(encodeCommand(command));
    return true;
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
