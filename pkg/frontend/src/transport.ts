/**
 * JSON-lines transport to a `python3 -m mipgym.server` subprocess.
 *
 * One request object per line on stdin, one response per line on stdout.
 * Requests carry a monotonically increasing `id`; responses are matched by
 * that id, so several requests may be in flight at once.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { createInterface } from "node:readline";

/** Error reported by the Python side, keyed by its exception type name. */
export class MipgymError extends Error {
  constructor(
    readonly type: string,
    message: string,
  ) {
    super(message);
    this.name = type;
  }
}

interface Pending {
  resolve: (value: unknown) => void;
  reject: (reason: Error) => void;
}

export class ServerProcess {
  private nextId = 0;
  private readonly pending = new Map<number, Pending>();
  private exited = false;

  private constructor(private readonly proc: ChildProcess) {}

  static spawn(python?: string): ServerProcess {
    const bin = python ?? process.env.MIPGYM_PYTHON ?? "python3";
    const proc = spawn(bin, ["-m", "mipgym.server"], {
      stdio: ["pipe", "pipe", "inherit"],
    });
    const server = new ServerProcess(proc);
    const lines = createInterface({ input: proc.stdout! });
    lines.on("line", (line) => server.onLine(line));
    proc.on("exit", () => server.onExit());
    proc.on("error", (err) => server.failAll(err));
    return server;
  }

  request(op: string, payload: Record<string, unknown> = {}): Promise<unknown> {
    if (this.exited) {
      return Promise.reject(
        new MipgymError("ServerExited", "server process is not running"),
      );
    }
    const id = ++this.nextId;
    return new Promise((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.proc.stdin!.write(JSON.stringify({ id, op, ...payload }) + "\n");
    });
  }

  /** Ask the server to exit and wait for the process to go away. */
  async close(): Promise<void> {
    if (this.exited) return;
    const gone = new Promise<void>((resolve) => {
      this.proc.once("exit", () => resolve());
    });
    try {
      await this.request("shutdown");
    } catch {
      // Already dying is fine; we only care that it goes away.
    }
    this.proc.stdin?.end();
    await gone;
  }

  private onLine(line: string): void {
    let message: {
      id: number;
      ok: boolean;
      result?: unknown;
      error?: { type: string; message: string };
    };
    try {
      message = JSON.parse(line);
    } catch {
      return; // not protocol output; ignore
    }
    const entry = this.pending.get(message.id);
    if (!entry) return;
    this.pending.delete(message.id);
    if (message.ok) {
      entry.resolve(message.result);
    } else {
      entry.reject(
        new MipgymError(
          message.error?.type ?? "ServerError",
          message.error?.message ?? "unknown server error",
        ),
      );
    }
  }

  private onExit(): void {
    this.exited = true;
    this.failAll(new MipgymError("ServerExited", "server process exited"));
  }

  private failAll(reason: Error): void {
    for (const entry of this.pending.values()) entry.reject(reason);
    this.pending.clear();
  }
}
