/** Session state machine driving one participant through an experiment.
 *
 * The server's cursor is authoritative: every view is derived from a fresh
 * /next payload, so a reload (or a rejected submission) resumes exactly
 * where the server left off. Within a trial the state only moves forward:
 * free response, then (for digit matrices) choice, then the next trial.
 * Response latency is measured from the moment a view is shown and
 * submitted silently with each response.
 */

import { Ack, ApiError, ServiceClient, SessionInfo, TrialPayload } from "./api.js";

export type Phase =
  | "idle"
  | "instructions"
  | "awaiting_free"
  | "awaiting_choice"
  | "awaiting_story_choice"
  | "done";

export interface View {
  phase: Phase;
  trial: number;
  nTrials: number;
  kind?: "digitmat" | "letterstring" | "story";
  display?: string[][] | string[];
  choices?: string[];
  story?: { story1: string; storyA: string; storyB: string; options: string[] };
  error?: string;
}

const FORWARD_ORDER: Phase[] = [
  "idle",
  "instructions",
  "awaiting_free",
  "awaiting_choice",
  "awaiting_story_choice",
  "done",
];

function phaseOf(payload: TrialPayload): Phase {
  if (payload.done) return "done";
  if (payload.stage === "free") return "awaiting_free";
  if (payload.stage === "choice") return "awaiting_choice";
  return "awaiting_story_choice";
}

export class SessionController {
  session: SessionInfo | null = null;
  view: View = { phase: "idle", trial: 0, nTrials: 0 };
  private shownAt = 0;

  constructor(
    private client: ServiceClient,
    private now: () => number = () => Date.now(),
  ) {}

  get sessionId(): string {
    if (!this.session) throw new Error("session not started");
    return this.session.id;
  }

  async start(experiment: string, seed?: number): Promise<SessionInfo> {
    this.session = await this.client.createSession(experiment, seed);
    this.view = {
      phase: "instructions",
      trial: 0,
      nTrials: this.session.n_trials,
    };
    this.shownAt = this.now();
    return this.session;
  }

  /** Leave the instructions screen and fetch the first trial. */
  async begin(): Promise<View> {
    if (this.view.phase !== "instructions") throw new Error("not on instructions");
    return this.refresh();
  }

  /** Re-derive the view from the server (also the reload/recovery path). */
  async refresh(): Promise<View> {
    try {
      const payload = await this.client.next(this.sessionId);
      this.applyPayload(payload);
    } catch (err) {
      this.view = { ...this.view, error: describeError(err) };
    }
    return this.view;
  }

  private applyPayload(payload: TrialPayload): void {
    const phase = phaseOf(payload);
    const previous = this.view.phase;
    // a trial's state machine never moves backward within the same trial
    if (
      payload.trial !== undefined &&
      payload.trial === this.view.trial &&
      FORWARD_ORDER.indexOf(phase) < FORWARD_ORDER.indexOf(previous)
    ) {
      throw new Error(`state moved backward: ${previous} -> ${phase}`);
    }
    this.view = {
      phase,
      trial: payload.trial ?? this.view.nTrials,
      nTrials: payload.n_trials ?? this.view.nTrials,
      kind: payload.kind,
      display: payload.display,
      choices: payload.choices,
      story:
        payload.kind === "story"
          ? {
              story1: payload.story1 ?? "",
              storyA: payload.storyA ?? "",
              storyB: payload.storyB ?? "",
              options: payload.options ?? ["A", "B", "Both"],
            }
          : undefined,
    };
    this.shownAt = this.now();
  }

  private latency(): number {
    return Math.max(0, this.now() - this.shownAt);
  }

  private async submit(body: Record<string, unknown>): Promise<Ack | null> {
    try {
      const ack = await this.client.respond(this.sessionId, {
        ...body,
        latencyMs: this.latency(),
      });
      await this.refresh();
      return ack;
    } catch (err) {
      // surface the rejection, then recover to the server's authoritative
      // state so the participant can continue
      const message = describeError(err);
      await this.refresh();
      this.view = { ...this.view, error: message };
      return null;
    }
  }

  async submitFree(text: string): Promise<Ack | null> {
    if (this.view.phase !== "awaiting_free") {
      this.view = { ...this.view, error: "no free response expected now" };
      return null;
    }
    return this.submit({ freeResponse: text });
  }

  async submitChoice(index: number): Promise<Ack | null> {
    return this.submit({ choiceIndex: index });
  }

  async submitStoryChoice(label: "A" | "B" | "Both"): Promise<Ack | null> {
    if (this.view.phase !== "awaiting_story_choice") {
      this.view = { ...this.view, error: "no story choice expected now" };
      return null;
    }
    return this.submit({ storyChoice: label });
  }
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.detail}`;
  return err instanceof Error ? err.message : String(err);
}

/** Scripted end-to-end run used by tests and smoke checks: answers every
 * trial (digits for matrices, tokens for letter strings, a story label),
 * always free response before choice. */
export async function runScriptedSession(
  client: ServiceClient,
  experiment: string,
  seed?: number,
): Promise<{ controller: SessionController; submissions: number }> {
  const controller = new SessionController(client);
  await controller.start(experiment, seed);
  let view = await controller.begin();
  let submissions = 0;
  let guard = 0;
  while (view.phase !== "done") {
    if (guard++ > 500) throw new Error("session did not terminate");
    if (view.phase === "awaiting_free") {
      await controller.submitFree(view.kind === "digitmat" ? "1 2 3 4 5".slice(0, 1) : "a b c");
      submissions++;
    } else if (view.phase === "awaiting_choice") {
      await controller.submitChoice(0);
      submissions++;
    } else if (view.phase === "awaiting_story_choice") {
      await controller.submitStoryChoice("A");
      submissions++;
    } else {
      throw new Error(`unexpected phase ${view.phase}`);
    }
    view = controller.view;
    if (view.error) throw new Error(`submission failed: ${view.error}`);
  }
  return { controller, submissions };
}
