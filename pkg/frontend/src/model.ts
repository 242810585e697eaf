// Types mirroring the audit service's JSON responses.  The dashboard
// renders these verbatim; it never derives statistics of its own.

export type ContestStatus = 'auditing' | 'accepted' | 'full-hand-count-complete';
export type Decision = 'stop' | 'escalate' | 'complete';

export interface RoundRisk {
  round: number;
  risk: number;
}

export interface ContestCard {
  id: string;
  status: ContestStatus;
  risk: number | null;
  riskDisplay: string | null;
  riskLimit: number;
  riskLimitDisplay: string;
  decision: Decision | null;
  reportedOutcome: string;
  finalOutcome: string | null;
  sampleSize: number;
  population: number;
  winFrequencies: Record<string, number> | null;
  winFrequencyDisplay: Record<string, string> | null;
  history: RoundRisk[];
}

export interface StatusResponse {
  round: number;
  contests: ContestCard[];
}

export interface OpenSelection {
  address: string;
  contests: string[];
}

export interface SelectionsResponse {
  round: number;
  open: OpenSelection[];
}

export interface InterpretationEntry {
  address: string;
  actual: Record<string, string>;
}

export interface InterpretationAck {
  recorded: number;
  open: number;
}

export interface JobRef {
  jobId: string;
}

export interface RoundCloseResult {
  decisions: Record<string, Decision>;
  status: Record<string, ContestStatus>;
}

export interface PlanResult {
  additional: Record<string, number>;
  stopProbabilities: Record<string, number>;
  fullHandCount: string[];
  totalAdditional: number;
}

export interface JobState<T = unknown> {
  status: 'pending' | 'done' | 'failed';
  result?: T;
  error?: { type: string; message: string };
}

export interface ServiceErrorBody {
  detail: { type: string; message: string } | string;
}
