import type { ReviewSummary } from './types';

/**
 * Walks reviews that still lack feedback from this reviewer.
 *
 * The pending list is fixed at refresh time; advancing past the end means
 * the queue is done until the next refresh picks up new reviews.
 */
export class ReviewQueue {
  private pending: ReviewSummary[] = [];
  private position = 0;

  refresh(summaries: ReviewSummary[]): void {
    this.pending = summaries.filter((summary) => !summary.reviewed);
    this.position = 0;
  }

  get total(): number {
    return this.pending.length;
  }

  /** 1-based position for the progress counter; 0 when the queue is empty. */
  get progress(): number {
    return this.pending.length === 0 ? 0 : Math.min(this.position + 1, this.pending.length);
  }

  get done(): boolean {
    return this.position >= this.pending.length;
  }

  current(): ReviewSummary | null {
    return this.done ? null : this.pending[this.position];
  }

  advance(): ReviewSummary | null {
    if (!this.done) this.position += 1;
    return this.current();
  }
}
