// Payload shapes of the orchestrator review API (schema_version 1).

export interface SessionSummary {
  case_id: string;
  state: string;
  closed_outcome: string | null;
  category: string | null;
  needs_review: boolean;
  plausible_patch_id: string | null;
  overfit_suspected: boolean;
  event_count: number;
}

export interface SessionListPayload {
  schema_version: number;
  sessions: SessionSummary[];
}

export interface VerifierOutcome {
  status: string;
  diagnostics: string[];
  raw_output: string;
  exit_code: number;
}

export interface SpecAttempt {
  iteration: number;
  text: string;
  parsed_ok: boolean;
  outcome: VerifierOutcome;
  spec_status: string;
}

export interface SpecFinal {
  text: string;
  status: string;
  terminal: string;
  iterations: number;
}

export interface TestOutcome {
  test: string;
  status: string;
  log: string;
}

export interface SuitePayload {
  status: string;
  failed: string[];
  tests: TestOutcome[];
}

export interface VerdictPayload {
  patch_id: string;
  provided: SuitePayload;
  heldout: SuitePayload;
  plausible: boolean;
  overfit_suspected: boolean;
}

export interface CandidatePayload {
  patch_id: string;
  diff: string;
  origin_mode: string;
  attempt_index: number;
}

export interface CandidateEntry {
  candidate: CandidatePayload;
  verdict: VerdictPayload | null;
}

export interface SessionEvent {
  schema_version: number;
  seq: number;
  type: string;
  from?: string;
  to?: string;
  at: string;
  data: Record<string, unknown>;
  artifacts?: Record<string, string>;
}

export interface ReviewDecisionRecord {
  subject: string;
  action: string;
  reviewer: string;
  decided_at: string;
  new_text: string;
}

export interface SessionDetail extends SessionSummary {
  schema_version: number;
  report_text: string;
  spec_history: SpecAttempt[];
  spec_final: SpecFinal | null;
  candidates: CandidateEntry[];
  events: SessionEvent[];
  decisions: ReviewDecisionRecord[];
}

export interface ReviewRequest {
  schema_version: number;
  subject: 'Spec' | 'Patch';
  action: 'Accept' | 'Reject' | 'Edit';
  reviewer: string;
  text: string;
}

export interface ReviewResponse {
  schema_version: number;
  case_id: string;
  state: string;
}
