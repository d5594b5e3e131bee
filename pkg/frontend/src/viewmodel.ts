/** Explorer state and the controller mutating it.
 *
 * The view model is always a pure function of the last service responses:
 * the client never computes transitions, scripts or suggestions locally.
 * When any call fails the explorer freezes; every control stays disabled
 * until a model is loaded again.
 */

import {
  GraphDoc,
  GuidanceApi,
  ServiceError,
  SuggestionDoc,
} from "./api.js";

export type Phase = "empty" | "loading" | "ready" | "frozen";

export interface ViewModel {
  phase: Phase;
  error: string | null;
  modelId: string | null;
  sessionId: string | null;
  graph: GraphDoc | null;
  currentState: number | null;
  suggestions: SuggestionDoc[];
  canFinish: boolean;
  script: string;
  warnings: string[];
  historyLength: number;
}

export const initialViewModel: ViewModel = {
  phase: "empty",
  error: null,
  modelId: null,
  sessionId: null,
  graph: null,
  currentState: null,
  suggestions: [],
  canFinish: false,
  script: "",
  warnings: [],
  historyLength: 0,
};

export type Listener = (vm: ViewModel) => void;

export class Explorer {
  state: ViewModel = initialViewModel;

  constructor(
    private readonly api: GuidanceApi,
    private readonly listener: Listener = () => undefined,
  ) {}

  private emit(patch: Partial<ViewModel>): void {
    this.state = { ...this.state, ...patch };
    this.listener(this.state);
  }

  private freeze(err: unknown): void {
    const message = err instanceof Error ? err.message : String(err);
    this.emit({ phase: "frozen", error: message });
  }

  get interactive(): boolean {
    return this.state.phase === "ready";
  }

  /** POST the model document, open a session, and pull the initial view. */
  async loadModel(modelDocument: string): Promise<void> {
    this.emit({ ...initialViewModel, phase: "loading" });
    try {
      const summary = await this.api.loadModel(modelDocument);
      await this.openOn(summary.modelId);
    } catch (err) {
      if (err instanceof ServiceError && err.status !== null && this.state.modelId === null) {
        // the model itself was rejected: recoverable, not a dead service
        this.emit({ ...initialViewModel, phase: "empty", error: err.message });
        return;
      }
      this.freeze(err);
    }
  }

  /** Open a session on a model the service already holds. */
  async loadExisting(modelId: string): Promise<void> {
    this.emit({ ...initialViewModel, phase: "loading" });
    try {
      await this.openOn(modelId);
    } catch (err) {
      this.freeze(err);
    }
  }

  private async openOn(modelId: string): Promise<void> {
    const session = await this.api.openSession(modelId);
    const graph = await this.api.graph(modelId);
    const options = await this.api.options(session.sessionId);
    const script = await this.api.script(session.sessionId);
    this.emit({
      phase: "ready",
      error: null,
      modelId,
      sessionId: session.sessionId,
      graph,
      currentState: options.cursor,
      suggestions: options.suggestions,
      canFinish: options.canFinish,
      script: script.script,
      warnings: session.warnings,
      historyLength: session.historyLength,
    });
  }

  /** Take a step; a refused label surfaces inline without freezing. */
  async chooseStep(label: string, params: string[], combined: boolean): Promise<void> {
    if (!this.interactive || this.state.sessionId === null) {
      return;
    }
    const sessionId = this.state.sessionId;
    try {
      const session = await this.api.step(sessionId, label, params, combined);
      await this.refresh(sessionId, session.warnings, session.historyLength);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 400) {
        const listing = err.available.length
          ? ` (valid here: ${err.available.join(", ")})`
          : "";
        this.emit({ error: err.message + listing });
        return;
      }
      this.freeze(err);
    }
  }

  async undo(): Promise<void> {
    if (!this.interactive || this.state.sessionId === null) {
      return;
    }
    const sessionId = this.state.sessionId;
    try {
      const session = await this.api.undo(sessionId);
      await this.refresh(sessionId, session.warnings, session.historyLength);
    } catch (err) {
      if (err instanceof ServiceError && err.status === 400) {
        this.emit({ error: err.message });
        return;
      }
      this.freeze(err);
    }
  }

  /** Mirror options and script from the service after any mutation. */
  private async refresh(
    sessionId: string,
    warnings: string[],
    historyLength: number,
  ): Promise<void> {
    const options = await this.api.options(sessionId);
    const script = await this.api.script(sessionId);
    this.emit({
      error: null,
      currentState: options.cursor,
      suggestions: options.suggestions,
      canFinish: options.canFinish,
      script: script.script,
      warnings,
      historyLength,
    });
  }
}
