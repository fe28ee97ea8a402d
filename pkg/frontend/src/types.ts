// Payload shapes of the review service's JSON endpoints.

export interface IssuePayload {
  tag: string;
  function: string | null;
  rationale: string;
  file: string;
  line: number;
}

export interface DiffLinePayload {
  no: number;
  sym: '+' | '-' | ' ';
  content: string;
}

export interface DiffFilePayload {
  path: string;
  lines: DiffLinePayload[];
}

export interface FeedbackRecord {
  feedback_id: string;
  review_id: string;
  issue_index: number;
  sentiment: 'up' | 'down';
  comment: string | null;
  reviewer_id: string;
  timestamp: string;
}

export interface VerdictPayload {
  suggestion_content: string;
  status: 'valid' | 'invalid';
  sentiment: string;
  line_matching: boolean;
  score: number;
  reason: string;
}

export interface AuditEntry {
  issue: IssuePayload;
  verdict: VerdictPayload;
  decision: 'kept' | 'dropped';
  reasons: string[];
}

export interface ReviewPayload {
  review_id: string;
  diff_id: string;
  created_at: string;
  issues: IssuePayload[];
  diff: DiffFilePayload[];
  feedback: FeedbackRecord[];
  audit?: AuditEntry[];
}

export interface ReviewSummary {
  review_id: string;
  diff_id: string;
  created_at: string;
  issue_count: number;
  reviewed: boolean;
}

export type Sentiment = 'up' | 'down';

export interface CardState {
  issueIndex: number;
  issue: IssuePayload;
  /** Last server-confirmed record from this reviewer, if any. */
  confirmed: FeedbackRecord | null;
  draftComment: string;
  /** Anchor position, or null when the cited line is not rendered. */
  anchor: { file: string; line: number } | null;
  error: string | null;
}

export interface ReviewView {
  reviewId: string;
  diffId: string;
  files: DiffFilePayload[];
  cards: CardState[];
  /** Cards whose (file, line) did not resolve to a rendered line. */
  unanchored: CardState[];
  dropped: AuditEntry[];
}
