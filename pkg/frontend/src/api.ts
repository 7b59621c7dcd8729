/** Typed client for the session service's HTTP+JSON API. */

export interface SessionInfo {
  id: string;
  experiment: string;
  seed: number;
  n_trials: number;
  instructions: string;
  example: MatrixExample | LetterExample | null;
}

export interface MatrixExample {
  display: string[][] | string[];
  answer: string;
  note?: string;
}

export type LetterExample = MatrixExample;

export interface TrialPayload {
  done: boolean;
  trial?: number;
  n_trials?: number;
  kind?: "digitmat" | "letterstring" | "story";
  stage?: "free" | "choice" | "story_choice";
  display?: string[][] | string[];
  choices?: string[];
  story1?: string;
  storyA?: string;
  storyB?: string;
  options?: string[];
}

export interface ResponseBody {
  freeResponse?: string;
  choiceIndex?: number;
  storyChoice?: string;
  latencyMs?: number;
}

export interface Ack {
  accepted: boolean;
  correct: boolean;
  trial_complete: boolean;
  done: boolean;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = (await resp.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body: keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class ServiceClient {
  constructor(private baseUrl: string) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  async createSession(experiment: string, seed?: number): Promise<SessionInfo> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seed === undefined ? { experiment } : { experiment, seed }),
    });
    return parseOrThrow<SessionInfo>(resp);
  }

  async next(sessionId: string): Promise<TrialPayload> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/next`);
    return parseOrThrow<TrialPayload>(resp);
  }

  async respond(sessionId: string, body: ResponseBody): Promise<Ack> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/response`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return parseOrThrow<Ack>(resp);
  }

  async exportRecords(sessionId: string, format: "jsonl" | "csv" = "jsonl"): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/sessions/${sessionId}/export?format=${format}`);
    if (!resp.ok) throw new ApiError(resp.status, resp.statusText);
    return resp.text();
  }
}
