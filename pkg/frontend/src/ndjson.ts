// Incremental newline-delimited JSON framing over a byte/text stream.

export class LineDecoder {
  private buffer = "";

  /** Feed a chunk; returns the complete lines it finished. */
  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines: string[] = [];
    let index: number;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index);
      this.buffer = this.buffer.slice(index + 1);
      if (line.length > 0) lines.push(line);
    }
    return lines;
  }

  /** Any trailing data without a newline (normally empty at stream end). */
  residue(): string {
    return this.buffer;
  }
}
