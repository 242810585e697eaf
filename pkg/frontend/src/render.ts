// Pure HTML renderers.  Every risk or frequency string shown to the
// operator is a verbatim field from a service response (riskDisplay,
// riskLimitDisplay, winFrequencyDisplay); this module never formats a
// number into a percentage itself.  Bars and sparklines use numeric
// fields for geometry only and carry no derived text.

import type {
  ContestCard,
  OpenSelection,
  PlanResult,
  RoundCloseResult,
  RoundRisk,
} from './model.js';

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
    .replace(/'/g, '&#39;');
}

function badge(card: ContestCard): string {
  if (card.status === 'accepted') return '<span class="badge badge-accepted">accepted</span>';
  if (card.status === 'full-hand-count-complete') {
    return '<span class="badge badge-complete">hand count complete</span>';
  }
  if (card.decision === 'escalate') return '<span class="badge badge-escalate">escalate</span>';
  return '<span class="badge badge-open">round open</span>';
}

function sparkline(history: RoundRisk[], riskLimit: number): string {
  if (history.length === 0) return '';
  const width = 120;
  const height = 28;
  const step = history.length > 1 ? width / (history.length - 1) : 0;
  const y = (risk: number) => height - Math.min(1, Math.max(0, risk)) * height;
  const points = history
    .map((h, i) => `${(history.length > 1 ? i * step : width / 2).toFixed(1)},${y(h.risk).toFixed(1)}`)
    .join(' ');
  const limitY = y(riskLimit).toFixed(1);
  return (
    `<svg class="sparkline" viewBox="0 0 ${width} ${height}" role="img" ` +
    `aria-label="risk by round">` +
    `<line x1="0" y1="${limitY}" x2="${width}" y2="${limitY}" class="spark-limit"/>` +
    `<polyline points="${points}" class="spark-line"/>` +
    `</svg>`
  );
}

function winBars(card: ContestCard): string {
  if (!card.winFrequencies || !card.winFrequencyDisplay) return '';
  const rows = Object.keys(card.winFrequencies)
    .sort((a, b) => (card.winFrequencies![b] ?? 0) - (card.winFrequencies![a] ?? 0))
    .map((outcome) => {
      const fraction = card.winFrequencies![outcome] ?? 0;
      const label = card.winFrequencyDisplay![outcome] ?? '';
      return (
        `<div class="win-row">` +
        `<span class="win-outcome">${escapeHtml(outcome)}</span>` +
        `<span class="win-bar"><span class="win-fill" style="width:${(fraction * 100).toFixed(2)}%"></span></span>` +
        `<span class="win-label">${escapeHtml(label)}</span>` +
        `</div>`
      );
    })
    .join('');
  return `<div class="win-bars">${rows}</div>`;
}

export function renderContestCard(card: ContestCard): string {
  const frozen = card.status !== 'auditing' ? ' frozen' : '';
  const outcome =
    card.finalOutcome !== null
      ? `<dt>outcome</dt><dd>${escapeHtml(card.finalOutcome)}` +
        (card.status === 'full-hand-count-complete' ? ' (hand count)' : '') +
        `</dd>`
      : '';
  return (
    `<article class="contest-card${frozen}" data-contest="${escapeHtml(card.id)}">` +
    `<header><h3>${escapeHtml(card.id)}</h3>${badge(card)}</header>` +
    `<dl>` +
    `<dt>risk</dt><dd class="risk">${card.riskDisplay !== null ? escapeHtml(card.riskDisplay) : '—'}</dd>` +
    `<dt>limit</dt><dd>${escapeHtml(card.riskLimitDisplay)}</dd>` +
    `<dt>sample</dt><dd>${card.sampleSize} of ${card.population} ballots</dd>` +
    `<dt>reported</dt><dd>${escapeHtml(card.reportedOutcome)}</dd>` +
    outcome +
    `</dl>` +
    winBars(card) +
    sparkline(card.history, card.riskLimit) +
    `</article>`
  );
}

export function renderWorklist(open: OpenSelection[], readOnly: boolean): string {
  if (open.length === 0) {
    return `<p class="worklist-empty">All selected ballots are recorded. ` +
      `The round can be closed.</p>`;
  }
  const rows = open
    .map((sel) => {
      const inputs = sel.contests
        .map(
          (contest) =>
            `<label>${escapeHtml(contest)} ` +
            `<input name="${escapeHtml(contest)}" required ` +
            `placeholder="choice seen by hand" ${readOnly ? 'disabled' : ''}/></label>`,
        )
        .join('');
      const button = readOnly ? '' : `<button type="submit">record</button>`;
      return (
        `<li class="worklist-item">` +
        `<form class="entry-form" data-address="${escapeHtml(sel.address)}">` +
        `<span class="address">${escapeHtml(sel.address)}</span>` +
        `${inputs}${button}` +
        `<span class="entry-error" role="alert"></span>` +
        `</form>` +
        `</li>`
      );
    })
    .join('');
  return `<ul class="worklist">${rows}</ul>`;
}

export function renderDecisions(result: RoundCloseResult): string {
  const rows = Object.entries(result.decisions)
    .map(
      ([contest, decision]) =>
        `<li><strong>${escapeHtml(contest)}</strong>: ` +
        `<span class="decision decision-${escapeHtml(decision)}">${escapeHtml(decision)}</span></li>`,
    )
    .join('');
  return `<ul class="decisions">${rows}</ul>`;
}

export function renderPlan(plan: PlanResult): string {
  // numeric fields are shown as-is (JSON value stringification only)
  const rows = Object.entries(plan.additional)
    .map(
      ([jurisdiction, count]) =>
        `<tr><td>${escapeHtml(jurisdiction)}</td><td>${String(count)}</td></tr>`,
    )
    .join('');
  const contests = Object.entries(plan.stopProbabilities)
    .map(
      ([contest, p]) =>
        `<li>${escapeHtml(contest)}: stop probability ${String(p)}` +
        (plan.fullHandCount.includes(contest) ? ' (full hand count required)' : '') +
        `</li>`,
    )
    .join('');
  return (
    `<div class="plan">` +
    `<table><thead><tr><th>jurisdiction</th><th>additional ballots</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<ul>${contests}</ul>` +
    `<p>total additional ballots: ${String(plan.totalAdditional)}</p>` +
    `</div>`
  );
}
