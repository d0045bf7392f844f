// Spawns a real review service over the fixture project so the flow
// tests exercise the live API, not a mock.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { cpSync, mkdirSync, mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const REPO_ROOT = resolve(fileURLToPath(new URL(".", import.meta.url)), "..", "..");
const FIXTURES = join(REPO_ROOT, "tests", "fixtures");
const PYTHON = process.env.PYTHON ?? "python3";

export interface LiveServer {
  baseUrl: string;
  projectDir: string;
  stop: () => Promise<void>;
}

export function buildProject(): string {
  const dir = mkdtempSync(join(tmpdir(), "taxoscope-ui-"));
  mkdirSync(join(dir, "ontologies"));
  cpSync(join(FIXTURES, "stc.ttl"), join(dir, "ontologies", "stc.ttl"));
  cpSync(join(FIXTURES, "ai_types.ttl"), join(dir, "ontologies", "ai_types.ttl"));
  cpSync(join(FIXTURES, "corp20.jsonl"), join(dir, "corpus.jsonl"));
  writeFileSync(
    join(dir, "taxoscope.toml"),
    '[project]\nreviewer = "ui-test"\n\n[ontology]\nst = "ontologies/stc.ttl"\nai = "ontologies/ai_types.ttl"\n',
  );
  execFileSync(PYTHON, ["-m", "taxoscope", "--project", dir, "screen"], {
    stdio: "pipe",
  });
  return dir;
}

export async function startServer(): Promise<LiveServer> {
  const projectDir = buildProject();
  const port = 20000 + Math.floor(Math.random() * 20000);
  const child: ChildProcess = spawn(
    PYTHON,
    ["-m", "taxoscope", "--project", projectDir, "serve", "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => (stderr += String(chunk)));

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30000;
  for (;;) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early (${child.exitCode}): ${stderr}`);
    }
    try {
      const response = await fetch(`${baseUrl}/api/funnel`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      child.kill();
      throw new Error(`server did not come up on ${baseUrl}: ${stderr}`);
    }
    await new Promise((r) => setTimeout(r, 150));
  }

  return {
    baseUrl,
    projectDir,
    stop: () =>
      new Promise<void>((resolveStop) => {
        child.once("exit", () => resolveStop());
        child.kill("SIGTERM");
        setTimeout(() => {
          if (child.exitCode === null) child.kill("SIGKILL");
        }, 3000).unref();
      }),
  };
}
