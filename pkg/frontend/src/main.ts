import { ReviewApp } from './app';

function reviewerIdFromQuery(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get('reviewer') ?? 'anonymous';
}

window.addEventListener('DOMContentLoaded', () => {
  const container = document.getElementById('app');
  if (!container) throw new Error('missing #app container');
  const params = new URLSearchParams(window.location.search);
  const app = new ReviewApp(container, {
    reviewerId: reviewerIdFromQuery(),
    debug: params.get('debug') === '1',
  });

  const nextButton = document.getElementById('next-review');
  nextButton?.addEventListener('click', () => void app.next());

  void app.start();
});
