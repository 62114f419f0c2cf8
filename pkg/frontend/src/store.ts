// Client-side session state: a thin cache over the API plus the live
// event subscription. All verdict semantics come from the server; the
// store never derives its own.

import { ApiClient } from './api.js';
import { SessionDetail, SessionEvent, SessionSummary } from './types.js';

export interface Filters {
  state: string | null;
  category: string | null;
}

export type Listener = () => void;

export class SessionStore {
  sessions: SessionSummary[] = [];
  filters: Filters = { state: null, category: null };
  detail: SessionDetail | null = null;
  timeline: SessionEvent[] = [];
  connectionError: string | null = null;

  private listeners: Listener[] = [];
  private eventAbort: AbortController | null = null;
  private openedAt = 0; // raw material for a future productivity metric

  constructor(readonly api: ApiClient) {}

  categories(): string[] {
    const seen = new Set<string>();
    for (const session of this.sessions) {
      if (session.category) seen.add(session.category);
    }
    return [...seen].sort();
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  async loadSessions(): Promise<void> {
    try {
      const payload = await this.api.listSessions();
      this.sessions = payload.sessions;
      this.connectionError = null;
    } catch (error) {
      this.connectionError = String(error);
    }
    this.notify();
  }

  filteredSessions(): SessionSummary[] {
    return this.sessions.filter((session) => {
      if (this.filters.state === 'needs_review' && !session.needs_review) return false;
      if (
        this.filters.state &&
        this.filters.state !== 'needs_review' &&
        session.state !== this.filters.state
      ) {
        return false;
      }
      if (this.filters.category && session.category !== this.filters.category) return false;
      return true;
    });
  }

  setFilters(filters: Partial<Filters>): void {
    this.filters = { ...this.filters, ...filters };
    this.notify();
  }

  async openSession(caseId: string): Promise<void> {
    this.closeSession();
    this.detail = await this.api.getSession(caseId);
    this.timeline = [...this.detail.events];
    this.openedAt = Date.now();
    this.notify();
    this.eventAbort = new AbortController();
    // the stream replays the log; merge by seq so replay + live stay deduped
    void this.api
      .subscribeEvents(caseId, (event) => this.applyEvent(event), this.eventAbort.signal)
      .catch(() => {
        /* stream closed (session closed or navigation) */
      });
  }

  closeSession(): void {
    this.eventAbort?.abort();
    this.eventAbort = null;
    this.detail = null;
    this.timeline = [];
  }

  applyEvent(event: SessionEvent): void {
    if (this.timeline.some((existing) => existing.seq === event.seq)) return;
    this.timeline = [...this.timeline, event].sort((a, b) => a.seq - b.seq);
    if (this.detail && event.type === 'transition' && event.to) {
      this.detail = { ...this.detail, state: event.to };
    }
    this.notify();
  }

  currentState(): string | null {
    return this.detail?.state ?? null;
  }

  async submitReview(
    subject: 'Spec' | 'Patch',
    action: 'Accept' | 'Reject' | 'Edit',
    text = '',
    reviewer = 'console',
  ): Promise<string> {
    if (!this.detail) throw new Error('no session open');
    const caseId = this.detail.case_id;
    const response = await this.api.submitReview(caseId, {
      subject,
      action,
      reviewer,
      text,
    });
    if (this.openedAt > 0) {
      console.info(`review latency ${caseId}: ${Date.now() - this.openedAt}ms (${action})`);
    }
    // the event stream delivers the transition; the response state is
    // authoritative if the stream lags
    return response.state;
  }
}
