import { ApiError, NetworkError, ReviewApiClient } from './api';
import { ReviewQueue } from './queue';
import {
  renderNotFound,
  renderProgress,
  renderRetryBanner,
  renderReview,
} from './render';
import type { CardState, ReviewView, Sentiment } from './types';
import { applyConfirmed, buildReviewView } from './view';

export interface AppOptions {
  reviewerId?: string;
  baseUrl?: string;
  debug?: boolean;
  fetchFn?: typeof fetch;
}

/**
 * Controller tying the API client, queue, and renderer together.
 *
 * Feedback flow is optimistic-free by design: a card only changes its
 * displayed state once the server echoes the stored record back. Failed
 * submissions keep the draft and show an inline error (4xx) or a retry
 * banner (network).
 */
export class ReviewApp {
  readonly client: ReviewApiClient;
  readonly queue = new ReviewQueue();
  view: ReviewView | null = null;
  private reviewerId: string;
  private debug: boolean;

  constructor(private container: HTMLElement, options: AppOptions = {}) {
    this.reviewerId = options.reviewerId ?? 'anonymous';
    this.debug = options.debug ?? false;
    this.client = new ReviewApiClient(
      options.baseUrl ?? '',
      this.reviewerId,
      options.fetchFn ?? fetch.bind(globalThis),
    );
  }

  async start(): Promise<void> {
    try {
      this.queue.refresh(await this.client.listReviews());
    } catch (err) {
      if (err instanceof NetworkError) {
        renderRetryBanner(this.container, () => void this.start());
        return;
      }
      throw err;
    }
    await this.showCurrent();
  }

  async showCurrent(): Promise<void> {
    renderProgress(this.container, this.queue.progress, this.queue.total);
    const summary = this.queue.current();
    if (!summary) {
      this.renderDone();
      return;
    }
    await this.loadReview(summary.review_id);
  }

  async loadReview(reviewId: string): Promise<void> {
    let payload;
    try {
      payload = await this.client.getReview(reviewId, this.debug);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        renderNotFound(this.container, reviewId);
        return;
      }
      if (err instanceof NetworkError) {
        renderRetryBanner(this.container, () => void this.loadReview(reviewId));
        return;
      }
      throw err;
    }
    this.view = buildReviewView(payload, this.reviewerId);
    this.renderView();
  }

  private renderView(): void {
    if (!this.view) return;
    renderReview(
      this.container,
      this.view,
      { onSubmit: (card, sentiment, comment) => void this.submit(card, sentiment, comment) },
      { debug: this.debug },
    );
    renderProgress(this.container, this.queue.progress, this.queue.total);
  }

  async submit(card: CardState, sentiment: Sentiment, comment: string): Promise<void> {
    if (!this.view) return;
    card.draftComment = comment;
    try {
      const record = await this.client.submitFeedback(
        this.view.reviewId,
        card.issueIndex,
        sentiment,
        comment,
      );
      applyConfirmed(this.view, record);
    } catch (err) {
      if (err instanceof NetworkError) {
        card.error = 'Could not reach the server; your draft is kept. Try again.';
      } else if (err instanceof ApiError) {
        card.error = `Submission rejected (${err.status}): ${err.message}`;
      } else {
        throw err;
      }
    }
    this.renderView();
  }

  async next(): Promise<void> {
    this.queue.advance();
    await this.showCurrent();
  }

  private renderDone(): void {
    this.container.textContent = '';
    const done = document.createElement('h2');
    done.className = 'queue-done';
    done.textContent = 'All reviews done';
    this.container.appendChild(done);
    renderProgress(this.container, this.queue.progress, this.queue.total);
  }
}
