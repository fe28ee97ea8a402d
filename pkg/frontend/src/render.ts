import type { CardState, ReviewView, Sentiment } from './types';
import { cardAt } from './view';

export interface CardCallbacks {
  onSubmit: (card: CardState, sentiment: Sentiment, comment: string) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderCard(card: CardState, callbacks: CardCallbacks): HTMLElement {
  const root = el('div', 'issue-card');
  root.dataset.issueIndex = String(card.issueIndex);

  const header = el('div', 'card-header');
  header.appendChild(el('span', 'card-tag', card.issue.tag));
  if (card.issue.function) {
    header.appendChild(el('span', 'card-function', card.issue.function));
  }
  header.appendChild(el('span', 'card-location', `${card.issue.file}:${card.issue.line}`));
  root.appendChild(header);

  root.appendChild(el('p', 'card-rationale', card.issue.rationale));

  const state = el('div', 'card-feedback-state');
  state.dataset.state = card.confirmed ? card.confirmed.sentiment : 'none';
  if (card.confirmed) {
    const label = card.confirmed.sentiment === 'up' ? 'Agreed' : 'Disagreed';
    state.textContent = card.confirmed.comment
      ? `${label}: ${card.confirmed.comment}`
      : label;
  }
  root.appendChild(state);

  const controls = el('div', 'card-controls');
  const comment = el('textarea', 'card-comment') as HTMLTextAreaElement;
  comment.placeholder = 'Optional critique (one sentence)';
  comment.value = card.draftComment;
  comment.addEventListener('input', () => {
    card.draftComment = comment.value;
  });
  const up = el('button', 'thumb-up', '👍');
  const down = el('button', 'thumb-down', '👎');
  up.addEventListener('click', () => callbacks.onSubmit(card, 'up', comment.value));
  down.addEventListener('click', () => callbacks.onSubmit(card, 'down', comment.value));
  controls.append(up, down, comment);
  root.appendChild(controls);

  const error = el('div', 'card-error');
  if (card.error) error.textContent = card.error;
  root.appendChild(error);

  return root;
}

function renderDiffFile(
  view: ReviewView,
  file: ReviewView['files'][number],
  callbacks: CardCallbacks,
): HTMLElement {
  const section = el('section', 'diff-file');
  section.appendChild(el('h3', 'diff-path', file.path));
  for (const line of file.lines) {
    const row = el('div', `diff-line sym-${line.sym === ' ' ? 'ctx' : line.sym === '+' ? 'add' : 'del'}`);
    row.appendChild(el('span', 'line-no', String(line.no)));
    row.appendChild(el('span', 'line-sym', line.sym));
    row.appendChild(el('span', 'line-content', line.content));
    section.appendChild(row);
    if (line.sym !== '-') {
      for (const card of cardAt(view, file.path, line.no)) {
        section.appendChild(renderCard(card, callbacks));
      }
    }
  }
  return section;
}

export function renderReview(
  container: HTMLElement,
  view: ReviewView,
  callbacks: CardCallbacks,
  options: { debug?: boolean } = {},
): void {
  container.textContent = '';
  container.appendChild(el('h2', 'review-title', `Review ${view.diffId || view.reviewId}`));

  if (view.cards.length === 0 && view.unanchored.length === 0) {
    container.appendChild(el('p', 'no-issues', 'No issues found for this change.'));
  }

  for (const file of view.files) {
    container.appendChild(renderDiffFile(view, file, callbacks));
  }

  if (view.unanchored.length > 0) {
    const tray = el('section', 'unanchored-tray');
    tray.appendChild(el('h3', undefined, 'Issues without a visible line'));
    for (const card of view.unanchored) {
      tray.appendChild(renderCard(card, callbacks));
    }
    container.appendChild(tray);
  }

  if (options.debug && view.dropped.length > 0) {
    const debug = el('section', 'dropped-issues');
    debug.appendChild(el('h3', undefined, 'Dropped by filters'));
    for (const entry of view.dropped) {
      const row = el('div', 'dropped-issue');
      row.appendChild(el('span', 'card-tag', entry.issue.tag));
      row.appendChild(el('span', 'dropped-reasons', entry.reasons.join(', ')));
      row.appendChild(el('span', 'dropped-rationale', entry.issue.rationale));
      debug.appendChild(row);
    }
    container.appendChild(debug);
  }
}

export function renderNotFound(container: HTMLElement, reviewId: string): void {
  container.textContent = '';
  container.appendChild(el('h2', 'not-found', `Review ${reviewId} was not found.`));
}

export function renderRetryBanner(container: HTMLElement, onRetry: () => void): void {
  const banner = el('div', 'retry-banner');
  banner.appendChild(el('span', undefined, 'Connection problem.'));
  const button = el('button', 'retry-button', 'Retry');
  button.addEventListener('click', onRetry);
  banner.appendChild(button);
  container.prepend(banner);
}

export function renderProgress(container: HTMLElement, position: number, total: number): void {
  let counter = container.querySelector('.queue-progress');
  if (!counter) {
    counter = el('div', 'queue-progress');
    container.prepend(counter);
  }
  counter.textContent = total === 0 ? 'All reviews done' : `${position}/${total}`;
}
