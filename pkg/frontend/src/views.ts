// Pure render functions: store state in, HTML strings out.

import { Filters } from './store.js';
import {
  CandidateEntry,
  SessionDetail,
  SessionEvent,
  SessionSummary,
  SpecAttempt,
} from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replaceAll('&', '&amp;')
    .replaceAll('<', '&lt;')
    .replaceAll('>', '&gt;')
    .replaceAll('"', '&quot;');
}

function badge(label: string, kind: string): string {
  return `<span class="badge badge-${kind}">${escapeHtml(label)}</span>`;
}

export function sessionRowHtml(session: SessionSummary): string {
  const badges: string[] = [];
  if (session.needs_review) badges.push(badge('needs review', 'review'));
  if (session.overfit_suspected) badges.push(badge('overfit suspected', 'overfit'));
  if (session.closed_outcome) badges.push(badge(session.closed_outcome, 'closed'));
  return (
    `<tr class="session-row" data-case-id="${escapeHtml(session.case_id)}">` +
    `<td class="case-id">${escapeHtml(session.case_id)}</td>` +
    `<td>${escapeHtml(session.state)}</td>` +
    `<td>${escapeHtml(session.category ?? '-')}</td>` +
    `<td>${session.plausible_patch_id ? 'yes' : 'no'}</td>` +
    `<td>${badges.join(' ')}</td>` +
    `</tr>`
  );
}

export function sessionListHtml(
  sessions: SessionSummary[],
  filters: Filters,
  connectionError: string | null,
  categories: string[] = [],
): string {
  if (connectionError) {
    return (
      `<div class="error">Cannot reach the repair service: ${escapeHtml(connectionError)}` +
      `<button id="retry">Retry</button></div>`
    );
  }
  const active = (value: string | null) => (filters.state === value ? ' class="active"' : '');
  const options = ['<option value="">all categories</option>']
    .concat(
      categories.map(
        (category) =>
          `<option value="${escapeHtml(category)}"${
            filters.category === category ? ' selected' : ''
          }>${escapeHtml(category)}</option>`,
      ),
    )
    .join('');
  const controls =
    `<div class="filters">` +
    `<button data-filter-state=""${active(null)}>all</button>` +
    `<button data-filter-state="needs_review"${active('needs_review')}>needs review</button>` +
    `<select id="category-filter">${options}</select>` +
    `</div>`;
  if (sessions.length === 0) {
    return controls + '<div class="empty">No repair sessions yet.</div>';
  }
  const rows = sessions.map(sessionRowHtml).join('\n');
  return (
    controls +
    `<table class="sessions">` +
    `<thead><tr><th>case</th><th>state</th><th>category</th><th>plausible</th><th></th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function diffHtml(diff: string): string {
  const lines = diff.split('\n').map((line) => {
    let kind = 'ctx';
    if (line.startsWith('+++') || line.startsWith('---')) kind = 'file';
    else if (line.startsWith('@@')) kind = 'hunk';
    else if (line.startsWith('+')) kind = 'add';
    else if (line.startsWith('-')) kind = 'del';
    return `<span class="diff-${kind}">${escapeHtml(line)}</span>`;
  });
  return `<pre class="diff">${lines.join('\n')}</pre>`;
}

export function candidateHtml(entry: CandidateEntry): string {
  const { candidate, verdict } = entry;
  const verdictBadges: string[] = [];
  if (verdict) {
    verdictBadges.push(badge(verdict.plausible ? 'plausible' : 'not plausible', verdict.plausible ? 'ok' : 'fail'));
    if (verdict.overfit_suspected) verdictBadges.push(badge('overfit suspected', 'overfit'));
    if (verdict.heldout.status !== 'NotRun') {
      verdictBadges.push(badge(`held-out: ${verdict.heldout.status}`, 'heldout'));
    }
  } else {
    verdictBadges.push(badge('not yet judged', 'pending'));
  }
  return (
    `<div class="candidate" data-patch-id="${escapeHtml(candidate.patch_id)}">` +
    `<div class="candidate-head">${escapeHtml(candidate.origin_mode)} attempt ` +
    `${candidate.attempt_index + 1} &middot; ${verdictBadges.join(' ')}</div>` +
    diffHtml(candidate.diff) +
    `</div>`
  );
}

export function specAttemptHtml(attempt: SpecAttempt): string {
  const diagnostics = attempt.outcome.diagnostics
    .map((d) => `<li class="diagnostic">${escapeHtml(d)}</li>`)
    .join('');
  return (
    `<div class="spec-attempt">` +
    `<div class="spec-head">iteration ${attempt.iteration}: ${escapeHtml(attempt.outcome.status)}</div>` +
    `<pre class="spec">${escapeHtml(attempt.text)}</pre>` +
    (diagnostics ? `<ul class="diagnostics">${diagnostics}</ul>` : '') +
    `</div>`
  );
}

export function timelineHtml(events: SessionEvent[]): string {
  const items = events
    .map((event) => {
      if (event.type === 'transition') {
        return `<li class="timeline-transition" data-to="${escapeHtml(event.to ?? '')}">${
          event.seq
        }. ${escapeHtml(event.from ?? '')} &rarr; ${escapeHtml(event.to ?? '')}</li>`;
      }
      if (event.type === 'review') {
        const data = event.data as { action?: string; reviewer?: string };
        return `<li class="timeline-review">${event.seq}. review: ${escapeHtml(
          data.action ?? '',
        )} by ${escapeHtml(data.reviewer ?? '')}</li>`;
      }
      return `<li class="timeline-other">${event.seq}. ${escapeHtml(event.type)}</li>`;
    })
    .join('\n');
  return `<ol class="timeline">${items}</ol>`;
}

export function sessionDetailHtml(detail: SessionDetail, timeline: SessionEvent[]): string {
  const specPane =
    (detail.spec_final
      ? `<div class="spec-final"><div class="spec-head">settled (${escapeHtml(
          detail.spec_final.terminal,
        )})</div><pre class="spec" id="spec-text">${escapeHtml(detail.spec_final.text)}</pre></div>`
      : '<div class="spec-final empty">no specification yet</div>') +
    detail.spec_history.map(specAttemptHtml).join('\n');
  const candidates = detail.candidates.map(candidateHtml).join('\n') || '<div class="empty">no candidates</div>';
  const reviewControls = detail.needs_review
    ? `<div class="review-controls">` +
      `<button id="accept">Accept</button>` +
      `<button id="reject">Reject</button>` +
      `<button id="edit-spec">Edit spec</button>` +
      `<button id="edit-patch">Edit patch</button>` +
      `<textarea id="edit-text" placeholder="replacement text"></textarea>` +
      `</div>`
    : '';
  return (
    `<div class="detail" data-case-id="${escapeHtml(detail.case_id)}" data-state="${escapeHtml(
      detail.state,
    )}">` +
    `<h2>${escapeHtml(detail.case_id)} &middot; ${escapeHtml(detail.state)}</h2>` +
    `<pre class="report">${escapeHtml(detail.report_text)}</pre>` +
    `<div class="panes">` +
    `<section class="pane pane-diff"><h3>Candidate patches</h3>${candidates}</section>` +
    `<section class="pane pane-spec"><h3>Specification</h3>${specPane}</section>` +
    `</div>` +
    reviewControls +
    `<section class="pane-timeline"><h3>Timeline</h3>${timelineHtml(timeline)}</section>` +
    `</div>`
  );
}
