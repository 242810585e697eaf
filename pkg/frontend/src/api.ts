// Typed client over the audit service HTTP API.  Every method is a
// thin fetch wrapper; validation failures surface the service's
// structured error body unchanged.

import type {
  InterpretationAck,
  InterpretationEntry,
  JobRef,
  JobState,
  SelectionsResponse,
  ServiceErrorBody,
  StatusResponse,
} from './model.js';

export class ApiError extends Error {
  constructor(
    public readonly statusCode: number,
    public readonly errorType: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function throwFromResponse(response: Response): Promise<never> {
  let type = 'HttpError';
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as ServiceErrorBody;
    if (typeof body.detail === 'string') {
      message = body.detail;
    } else if (body.detail) {
      type = body.detail.type;
      message = body.detail.message;
    }
  } catch {
    // non-JSON error body: keep the HTTP status message
  }
  throw new ApiError(response.status, type, message);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly operatorToken: string | null = null,
  ) {}

  get readOnly(): boolean {
    return this.operatorToken === null;
  }

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) await throwFromResponse(response);
    return (await response.json()) as T;
  }

  private async post<T>(path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' };
    if (this.operatorToken !== null) headers['X-Operator-Token'] = this.operatorToken;
    const response = await fetch(`${this.baseUrl}${path}`, {
      method: 'POST',
      headers,
      body: JSON.stringify(body ?? {}),
    });
    if (!response.ok) await throwFromResponse(response);
    return (await response.json()) as T;
  }

  getStatus(): Promise<StatusResponse> {
    return this.get('/status');
  }

  getSelections(): Promise<SelectionsResponse> {
    return this.get('/selections');
  }

  submitInterpretations(entries: InterpretationEntry[]): Promise<InterpretationAck> {
    return this.post('/interpretations', { entries });
  }

  closeRound(): Promise<JobRef> {
    return this.post('/round/close');
  }

  requestPlan(confidence = 0.9): Promise<JobRef> {
    return this.post('/plan', { confidence });
  }

  getJob<T>(jobId: string): Promise<JobState<T>> {
    return this.get(`/jobs/${jobId}`);
  }

  exportUrl(): string {
    return `${this.baseUrl}/export`;
  }
}
