// Raw TCP framing of the gateway protocol, for node-side tests and the
// headless replay driver.  Browser builds must not import this module.

import * as net from "node:net";

import { LineDecoder } from "./ndjson.js";
import { Transport } from "./transport.js";

export class TcpTransport implements Transport {
  private decoder = new LineDecoder();
  private handlers: Array<(line: string) => void> = [];
  private closeHandlers: Array<() => void> = [];

  private constructor(private socket: net.Socket) {
    socket.on("data", (chunk: Buffer) => {
      for (const line of this.decoder.push(chunk.toString("utf-8"))) {
        this.handlers.forEach((h) => h(line));
      }
    });
    socket.on("close", () => this.closeHandlers.forEach((h) => h()));
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () => resolve(new TcpTransport(socket)));
      socket.on("error", reject);
    });
  }

  sendLine(line: string): void {
    this.socket.write(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.socket.end();
  }
}
