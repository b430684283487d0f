// Headless replay client: stream a fixture sequence into a running gateway
// over TCP and write the exported session log.
//
//   node dist/cliReplay.js 127.0.0.1:8765 path/to/sequence out.jsonl

import * as fs from "node:fs";

import { TcpTransport } from "./nodeTransport.js";
import { loadFixture, replayFixture } from "./replayDriver.js";
import { UiSession } from "./session.js";

async function main(): Promise<void> {
  const [listen, dir, outPath] = process.argv.slice(2);
  if (!listen || !dir || !outPath) {
    console.error("usage: cliReplay <host:port> <sequence-dir> <out.jsonl>");
    process.exit(1);
  }
  const [host, port] = listen.split(":");
  const transport = await TcpTransport.connect(host, Number(port));
  const session = new UiSession(transport);
  const fixture = loadFixture(dir);
  await replayFixture(session, fixture, transport);
  fs.writeFileSync(outPath, session.exportLog());
  transport.close();
  console.log(`${outPath}: ${session.logLineCount} lines`);
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
