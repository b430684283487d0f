// Transport abstraction over the gateway's newline-delimited JSON protocol.
// Browsers use the WebSocket framing (one JSON line per message); node
// tests and the replay CLI use the raw TCP framing from nodeTransport.ts.

export interface Transport {
  sendLine(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private handlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];
  readonly ready: Promise<void>;

  constructor(private ws: WebSocket) {
    this.ready = new Promise((resolve, reject) => {
      ws.addEventListener("open", () => resolve());
      ws.addEventListener("error", () => reject(new Error("websocket error")));
    });
    ws.addEventListener("message", (event) => {
      const text = typeof event.data === "string" ? event.data : "";
      for (const piece of text.split("\n")) {
        const line = piece.trim();
        if (line) this.handlers.forEach((h) => h(line));
      }
    });
    ws.addEventListener("close", () => this.closeHandlers.forEach((h) => h()));
  }

  static connect(url: string): WebSocketTransport {
    return new WebSocketTransport(new WebSocket(url));
  }

  sendLine(line: string): void {
    this.ws.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.ws.close();
  }
}
