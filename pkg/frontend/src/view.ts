import type { CardState, FeedbackRecord, ReviewPayload, ReviewView } from './types';

/**
 * Build the view model from an API payload.
 *
 * Every issue becomes exactly one card: anchored to its (file, line) when
 * that line exists in the rendered diff, otherwise placed in the unanchored
 * tray. Nothing is ever hidden.
 */
export function buildReviewView(payload: ReviewPayload, reviewerId: string): ReviewView {
  const rendered = new Set<string>();
  for (const file of payload.diff) {
    for (const line of file.lines) {
      // issues target new code, so '+' and ' ' lines are anchorable
      if (line.sym !== '-') rendered.add(`${file.path}:${line.no}`);
    }
  }
  const mine = new Map<number, FeedbackRecord>();
  for (const record of payload.feedback) {
    if (record.reviewer_id === reviewerId) mine.set(record.issue_index, record);
  }
  const cards: CardState[] = payload.issues.map((issue, issueIndex) => {
    const confirmed = mine.get(issueIndex) ?? null;
    const anchored = rendered.has(`${issue.file}:${issue.line}`);
    return {
      issueIndex,
      issue,
      confirmed,
      draftComment: '',
      anchor: anchored ? { file: issue.file, line: issue.line } : null,
      error: null,
    };
  });
  return {
    reviewId: payload.review_id,
    diffId: payload.diff_id,
    files: payload.diff,
    cards: cards.filter((c) => c.anchor !== null),
    unanchored: cards.filter((c) => c.anchor === null),
    dropped: (payload.audit ?? []).filter((entry) => entry.decision === 'dropped'),
  };
}

export function allCards(view: ReviewView): CardState[] {
  return [...view.cards, ...view.unanchored];
}

export function cardAt(view: ReviewView, file: string, line: number): CardState[] {
  return view.cards.filter((c) => c.anchor!.file === file && c.anchor!.line === line);
}

/** Replace a card's confirmed record after the server acknowledged it. */
export function applyConfirmed(view: ReviewView, record: FeedbackRecord): void {
  for (const card of allCards(view)) {
    if (card.issueIndex === record.issue_index) {
      card.confirmed = record;
      card.draftComment = '';
      card.error = null;
    }
  }
}
