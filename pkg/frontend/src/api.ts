/** Typed client for the guidance service HTTP API. */

export interface ParamVectorDoc {
  params: string[];
  combined: boolean;
  count?: number;
}

export interface SuggestionDoc {
  label: string;
  displayName: string;
  parameterCandidates: ParamVectorDoc[];
  combinedHint: boolean;
  leadsToAccepting: boolean;
}

export interface OptionsDoc {
  suggestions: SuggestionDoc[];
  canFinish: boolean;
  cursor: number;
}

export interface GraphStateDoc {
  id: number;
  accepting: boolean;
  initial: boolean;
}

export interface GraphEdgeDoc {
  source: number;
  target: number;
  label: string;
  witnesses: ParamVectorDoc[];
}

export interface GraphDoc {
  states: GraphStateDoc[];
  edges: GraphEdgeDoc[];
}

export interface SessionStateDoc {
  sessionId: string;
  cursor: number;
  accepting: boolean;
  historyLength: number;
  warnings: string[];
}

export interface ModelSummaryDoc {
  modelId: string;
  states: number;
  transitions: number;
  accepting: number[];
  initial: number;
  hasGuards: boolean;
}

export interface ScriptDoc {
  script: string;
  accepting: boolean;
}

/** A failed call; `available` carries the labels a refused step listed. */
export class ServiceError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
    readonly available: string[] = [],
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GuidanceApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ServiceError(`service unreachable: ${String(err)}`);
    }
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      if (response.ok) {
        throw new ServiceError("service returned a non-JSON body", response.status);
      }
    }
    if (!response.ok) {
      const doc = (body ?? {}) as { error?: string; available?: string[] };
      throw new ServiceError(
        doc.error ?? `request failed with status ${response.status}`,
        response.status,
        doc.available ?? [],
      );
    }
    return body as T;
  }

  loadModel(modelDocument: string): Promise<ModelSummaryDoc> {
    return this.request<ModelSummaryDoc>("/models", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: modelDocument,
    });
  }

  listModels(): Promise<{ models: ModelSummaryDoc[] }> {
    return this.request("/models");
  }

  openSession(modelId: string): Promise<SessionStateDoc> {
    return this.request(`/models/${modelId}/sessions`, { method: "POST" });
  }

  graph(modelId: string): Promise<GraphDoc> {
    return this.request(`/models/${modelId}/graph`);
  }

  options(sessionId: string): Promise<OptionsDoc> {
    return this.request(`/sessions/${sessionId}/options`);
  }

  step(
    sessionId: string,
    label: string,
    params: string[],
    combined: boolean,
  ): Promise<SessionStateDoc> {
    return this.request(`/sessions/${sessionId}/step`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ label, params, combined }),
    });
  }

  undo(sessionId: string): Promise<SessionStateDoc> {
    return this.request(`/sessions/${sessionId}/undo`, { method: "POST" });
  }

  script(sessionId: string): Promise<ScriptDoc> {
    return this.request(`/sessions/${sessionId}/script`);
  }
}
