// In-memory stand-in for the review service, mirroring its endpoint
// semantics (last-write-wins feedback keyed by review/issue/reviewer).
import type { FeedbackRecord, ReviewPayload, ReviewSummary } from '../src/types';

export interface FakeServer {
  fetchFn: typeof fetch;
  feedbackLog: FeedbackRecord[];
  liveFeedback(): FeedbackRecord[];
  exportRows(): Array<Record<string, unknown>>;
  offline: boolean;
}

export function fixturePayload(overrides: Partial<ReviewPayload> = {}): ReviewPayload {
  return {
    review_id: 'rev-1',
    diff_id: 'fix-1',
    created_at: '2024-05-01T00:00:00+00:00',
    issues: [
      {
        tag: 'Documentation',
        function: 'safe_ratio',
        rationale: 'Could you add a docstring describing its purpose?',
        file: 'metrics/ratio.py',
        line: 3,
      },
      {
        tag: 'DivisionByZero',
        function: 'safe_ratio',
        rationale: 'Could you validate the divisor is non-zero first?',
        file: 'metrics/ratio.py',
        line: 5,
      },
    ],
    diff: [
      {
        path: 'metrics/ratio.py',
        lines: [
          { no: 1, sym: ' ', content: 'import math' },
          { no: 2, sym: ' ', content: '' },
          { no: 3, sym: '+', content: 'def safe_ratio(num, den):' },
          { no: 4, sym: '+', content: '    scaled = num * 100' },
          { no: 5, sym: '+', content: '    return scaled / den' },
          { no: 6, sym: '+', content: '' },
          { no: 7, sym: ' ', content: 'def existing():' },
          { no: 8, sym: ' ', content: '    return 1' },
        ],
      },
    ],
    feedback: [],
    ...overrides,
  };
}

export function makeFakeServer(payloads: ReviewPayload[]): FakeServer {
  const reviews = new Map(payloads.map((p) => [p.review_id, p]));
  const feedbackLog: FeedbackRecord[] = [];
  let counter = 0;

  const live = (): FeedbackRecord[] => {
    const byKey = new Map<string, FeedbackRecord>();
    for (const record of feedbackLog) {
      byKey.set(`${record.review_id}:${record.issue_index}:${record.reviewer_id}`, record);
    }
    return [...byKey.values()];
  };

  const server: FakeServer = {
    feedbackLog,
    offline: false,
    liveFeedback: live,
    exportRows: () =>
      live().map((record) => {
        const review = reviews.get(record.review_id)!;
        return {
          diff_id: review.diff_id,
          diff_text: '<diff text>',
          meta: {},
          issue: review.issues[record.issue_index],
          sentiment: record.sentiment,
          comment: record.comment,
        };
      }),
    fetchFn: async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
      if (server.offline) throw new TypeError('fetch failed');
      const url = String(input);
      const reviewerId =
        (init?.headers as Record<string, string> | undefined)?.['X-Reviewer-Id'] ?? 'anonymous';

      if (url.endsWith('/v1/reviews') && (!init?.method || init.method === 'GET')) {
        const summaries: ReviewSummary[] = [...reviews.values()].map((p) => ({
          review_id: p.review_id,
          diff_id: p.diff_id,
          created_at: p.created_at,
          issue_count: p.issues.length,
          reviewed: live().some(
            (r) => r.review_id === p.review_id && r.reviewer_id === reviewerId,
          ),
        }));
        return json({ reviews: summaries });
      }

      const getMatch = url.match(/\/v1\/reviews\/([^/?]+)(\?debug=1)?$/);
      if (getMatch) {
        const review = reviews.get(getMatch[1]);
        if (!review) return json({ error: 'unknown review' }, 404);
        const body: ReviewPayload = {
          ...review,
          feedback: live().filter((r) => r.review_id === review.review_id),
        };
        if (!getMatch[2]) delete (body as Partial<ReviewPayload>).audit;
        return json(body);
      }

      if (url.endsWith('/v1/issues/feedback') && init?.method === 'POST') {
        const body = JSON.parse(String(init.body));
        const review = reviews.get(body.review_id);
        if (!review) return json({ error: 'unknown review' }, 404);
        if (body.issue_index < 0 || body.issue_index >= review.issues.length) {
          return json({ error: 'issue_index out of range' }, 422);
        }
        counter += 1;
        const record: FeedbackRecord = {
          feedback_id: `fb-${counter}`,
          review_id: body.review_id,
          issue_index: body.issue_index,
          sentiment: body.sentiment,
          comment: body.comment ?? null,
          reviewer_id: reviewerId,
          timestamp: `2024-05-01T00:00:${String(counter).padStart(2, '0')}+00:00`,
        };
        feedbackLog.push(record);
        return json(record);
      }

      return json({ error: `unhandled route ${url}` }, 500);
    },
  };
  return server;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}
