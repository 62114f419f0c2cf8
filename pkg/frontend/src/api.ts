// Typed client for the orchestrator review API.

import { streamSse, SseMessage } from './sse.js';
import {
  ReviewRequest,
  ReviewResponse,
  SessionDetail,
  SessionEvent,
  SessionListPayload,
} from './types.js';

export const SCHEMA_VERSION = 1;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

async function expectJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: string };
      if (body.detail) detail = body.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string = '') {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listSessions(): Promise<SessionListPayload> {
    return expectJson(await fetch(this.url('/sessions')));
  }

  async getSession(caseId: string): Promise<SessionDetail> {
    return expectJson(await fetch(this.url(`/sessions/${caseId}`)));
  }

  async submitReview(
    caseId: string,
    review: Omit<ReviewRequest, 'schema_version'>,
  ): Promise<ReviewResponse> {
    const payload: ReviewRequest = { schema_version: SCHEMA_VERSION, ...review };
    const response = await fetch(this.url(`/sessions/${caseId}/review`), {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
    return expectJson(response);
  }

  subscribeEvents(
    caseId: string,
    onEvent: (event: SessionEvent) => void,
    signal?: AbortSignal,
  ): Promise<void> {
    const handle = (message: SseMessage) => {
      if (message.event !== 'session') return;
      onEvent(JSON.parse(message.data) as SessionEvent);
    };
    return streamSse(this.url(`/sessions/${caseId}/events`), handle, signal);
  }
}
