import type { FeedbackRecord, ReviewPayload, ReviewSummary, Sentiment } from './types';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

/** Raised on fetch-level failures (offline, refused) as opposed to 4xx/5xx. */
export class NetworkError extends Error {}

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.error === 'string') detail = body.error;
  } catch {
    // keep statusText
  }
  return new ApiError(resp.status, detail);
}

export class ReviewApiClient {
  constructor(
    private baseUrl: string = '',
    private reviewerId: string = 'anonymous',
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, {
        ...init,
        headers: {
          'Content-Type': 'application/json',
          'X-Reviewer-Id': this.reviewerId,
          ...(init?.headers ?? {}),
        },
      });
    } catch (err) {
      throw new NetworkError(err instanceof Error ? err.message : String(err));
    }
    if (!resp.ok) throw await parseError(resp);
    return resp;
  }

  async listReviews(): Promise<ReviewSummary[]> {
    const resp = await this.request('/v1/reviews');
    const body = await resp.json();
    return body.reviews as ReviewSummary[];
  }

  async getReview(reviewId: string, debug = false): Promise<ReviewPayload> {
    const suffix = debug ? '?debug=1' : '';
    const resp = await this.request(`/v1/reviews/${reviewId}${suffix}`);
    return (await resp.json()) as ReviewPayload;
  }

  async submitFeedback(
    reviewId: string,
    issueIndex: number,
    sentiment: Sentiment,
    comment: string | null,
  ): Promise<FeedbackRecord> {
    const resp = await this.request('/v1/issues/feedback', {
      method: 'POST',
      body: JSON.stringify({
        review_id: reviewId,
        issue_index: issueIndex,
        sentiment,
        comment: comment || null,
      }),
    });
    return (await resp.json()) as FeedbackRecord;
  }
}
