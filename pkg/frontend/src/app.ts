// Dashboard controller: loads status and the open worklist, submits
// interpretation entries, and drives the round-close flow (job start,
// poll, decision screen, refresh).  Mirrors the service's single-
// operator contract; with no token the app is a read-only observer.

import { ApiClient, ApiError } from './api.js';
import { pollJobUntilDone } from './jobs.js';
import type { PlanResult, RoundCloseResult } from './model.js';
import { renderContestCard, renderDecisions, renderPlan, renderWorklist } from './render.js';

export class App {
  constructor(
    private readonly client: ApiClient,
    private readonly root: Document,
  ) {}

  private el(id: string): HTMLElement {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  }

  async refresh(): Promise<void> {
    const [status, selections] = await Promise.all([
      this.client.getStatus(),
      this.client.getSelections(),
    ]);
    this.el('round-number').textContent = String(status.round);
    this.el('contests').innerHTML = status.contests
      .map((card) => renderContestCard(card))
      .join('');
    this.el('worklist').innerHTML = renderWorklist(selections.open, this.client.readOnly);
    const auditing = status.contests.some((c) => c.status === 'auditing');
    const closeButton = this.el('close-round') as HTMLButtonElement;
    closeButton.disabled =
      this.client.readOnly || !auditing || selections.open.length > 0;
    closeButton.title =
      selections.open.length > 0
        ? 'record every selected ballot first'
        : 'measure risk and decide';
    (this.el('plan-button') as HTMLButtonElement).disabled =
      this.client.readOnly || !auditing;
  }

  mount(): void {
    this.el('worklist').addEventListener('submit', (event) => {
      void this.onEntrySubmit(event);
    });
    this.el('close-round').addEventListener('click', () => {
      void this.onCloseRound();
    });
    this.el('plan-button').addEventListener('click', () => {
      void this.onPlan();
    });
    this.el('refresh').addEventListener('click', () => {
      void this.refresh();
    });
    const exportLink = this.el('export-link') as HTMLAnchorElement;
    exportLink.href = this.client.exportUrl();
    void this.refresh();
  }

  private async onEntrySubmit(event: Event): Promise<void> {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const address = form.dataset.address;
    if (!address) return;
    const actual: Record<string, string> = {};
    for (const input of Array.from(form.querySelectorAll('input'))) {
      actual[input.name] = input.value.trim();
    }
    const errorSlot = form.querySelector('.entry-error') as HTMLElement;
    try {
      await this.client.submitInterpretations([{ address, actual }]);
      form.closest('li')?.remove(); // optimistic removal from the worklist
      await this.refresh();
    } catch (error) {
      // surface the service's rejection inline against the entry
      errorSlot.textContent =
        error instanceof ApiError ? error.message : String(error);
    }
  }

  private async onCloseRound(): Promise<void> {
    const banner = this.el('job-banner');
    banner.textContent = 'measuring risk…';
    try {
      const { jobId } = await this.client.closeRound();
      const result = await pollJobUntilDone<RoundCloseResult>(this.client, jobId);
      banner.textContent = '';
      this.el('decisions').innerHTML = renderDecisions(result);
      await this.refresh();
    } catch (error) {
      banner.textContent = `round close failed: ${
        error instanceof Error ? error.message : String(error)
      }`;
    }
  }

  private async onPlan(): Promise<void> {
    const banner = this.el('job-banner');
    banner.textContent = 'projecting workload…';
    try {
      const { jobId } = await this.client.requestPlan();
      const result = await pollJobUntilDone<PlanResult>(this.client, jobId);
      banner.textContent = '';
      this.el('plan-output').innerHTML = renderPlan(result);
    } catch (error) {
      banner.textContent = `planning failed: ${
        error instanceof Error ? error.message : String(error)
      }`;
    }
  }
}
