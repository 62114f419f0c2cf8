// Browser bootstrap: wires the store to the DOM. The only configuration is
// the service base URL (window.RESPEC_API or same origin).

import { ApiClient } from './api.js';
import { SessionStore } from './store.js';
import { sessionDetailHtml, sessionListHtml } from './views.js';

declare global {
  interface Window {
    RESPEC_API?: string;
  }
}

function render(store: SessionStore, root: HTMLElement): void {
  if (store.detail) {
    root.innerHTML =
      '<button id="back">&larr; sessions</button>' +
      sessionDetailHtml(store.detail, store.timeline);
  } else {
    root.innerHTML =
      '<h1>respec review console</h1>' +
      sessionListHtml(
        store.filteredSessions(),
        store.filters,
        store.connectionError,
        store.categories(),
      );
  }
}

function currentEditText(root: HTMLElement): string {
  const area = root.querySelector<HTMLTextAreaElement>('#edit-text');
  return area ? area.value : '';
}

function prefillEditor(root: HTMLElement, selector: string): void {
  const source = root.querySelector(selector);
  const area = root.querySelector<HTMLTextAreaElement>('#edit-text');
  if (source && area) area.value = source.textContent ?? '';
}

export function bootstrap(root: HTMLElement, baseUrl = ''): SessionStore {
  const store = new SessionStore(new ApiClient(baseUrl));
  store.subscribe(() => render(store, root));

  root.addEventListener('click', (raw) => {
    const target = raw.target as HTMLElement;
    const row = target.closest<HTMLElement>('.session-row');
    if (row?.dataset.caseId) {
      void store.openSession(row.dataset.caseId);
      return;
    }
    if (target.id === 'back') {
      store.closeSession();
      void store.loadSessions();
      return;
    }
    if (target.id === 'retry') {
      void store.loadSessions();
      return;
    }
    if (target.dataset.filterState !== undefined) {
      store.setFilters({ state: target.dataset.filterState || null });
      return;
    }
    if (target.id === 'accept') {
      void store.submitReview('Patch', 'Accept');
      return;
    }
    if (target.id === 'reject') {
      void store.submitReview('Patch', 'Reject', currentEditText(root));
      return;
    }
    if (target.id === 'edit-spec') {
      const text = currentEditText(root);
      if (text.trim()) {
        void store.submitReview('Spec', 'Edit', text);
      } else {
        prefillEditor(root, '#spec-text');
      }
      return;
    }
    if (target.id === 'edit-patch') {
      const text = currentEditText(root);
      if (text.trim()) {
        void store.submitReview('Patch', 'Edit', text);
      } else {
        prefillEditor(root, '.candidate .diff');
      }
    }
  });

  void store.loadSessions();
  return store;
}

if (typeof document !== 'undefined') {
  const root = document.getElementById('app');
  if (root) bootstrap(root, window.RESPEC_API ?? '');
}
