import { ApiError, Client } from './api.js';
import { ItemForm, PendingQueue } from './state.js';
import { isDone, JudgmentBody } from './types.js';
import { renderDone, renderError, renderItem, renderProgress } from './view.js';

const client = new Client('');
const pending = new PendingQueue();

const app = document.getElementById('app') as HTMLElement;
const errorBox = document.createElement('div');
const progressBox = document.createElement('div');
const formBox = document.createElement('div');

let annotator = '';
let form: ItemForm | null = null;

function clearError(): void {
  errorBox.replaceChildren();
}

async function refreshProgress(): Promise<void> {
  try {
    renderProgress(progressBox, await client.progress());
  } catch {
    // progress is cosmetic; never block judging on it
  }
}

function redraw(): void {
  if (!form) {
    return;
  }
  renderItem(formBox, form, {
    onVerdict(index, verdict) {
      form!.setVerdict(index, verdict);
      form!.focused = index;
      redraw();
    },
    onTag(index, category) {
      form!.setTag(index, category);
      redraw();
    },
    onSubmit() {
      void submit();
    },
  });
}

async function loadNext(): Promise<void> {
  clearError();
  try {
    const next = await client.next(annotator);
    if (isDone(next)) {
      form = null;
      renderDone(formBox, next.total);
      return;
    }
    form = new ItemForm(next);
    redraw();
  } catch (err) {
    renderError(errorBox, `could not fetch the next item: ${String(err)}`, () => void loadNext());
  }
  void refreshProgress();
}

async function send(body: JudgmentBody): Promise<void> {
  try {
    await client.submit(body);
    clearError();
    await loadNext();
  } catch (err) {
    if (err instanceof ApiError) {
      // 400/409: the server explained itself; entered verdicts stay on screen
      renderError(errorBox, `submission rejected (${err.status}): ${err.message}`);
      if (err.status === 409) {
        // already judged: move on without losing anything locally
        await loadNext();
      }
      return;
    }
    // transient failure: keep exactly one pending submission for retry
    if (!pending.offer(body)) {
      renderError(errorBox, 'a submission is already queued; retry it first', retryPending);
      return;
    }
    renderError(errorBox, `network problem, submission queued: ${String(err)}`, retryPending);
  }
}

function retryPending(): void {
  const body = pending.take();
  if (body) {
    void send(body);
  }
}

async function submit(): Promise<void> {
  if (!form || !form.complete()) {
    return;
  }
  await send(form.body(annotator));
}

function bindKeys(): void {
  document.addEventListener('keydown', (event) => {
    if (!form || event.target instanceof HTMLInputElement
        || event.target instanceof HTMLSelectElement
        || event.target instanceof HTMLTextAreaElement) {
      return;
    }
    if (event.key === 'j' || event.key === 'ArrowDown') {
      form.moveFocus(1);
      redraw();
    } else if (event.key === 'k' || event.key === 'ArrowUp') {
      form.moveFocus(-1);
      redraw();
    } else if (event.key === '1') {
      form.setVerdict(form.focused, 1);
      redraw();
    } else if (event.key === '0') {
      form.setVerdict(form.focused, 0);
      redraw();
    } else if (event.key === 'Enter') {
      void submit();
    }
  });
}

function start(): void {
  const intro = document.createElement('form');
  intro.id = 'login';
  const field = document.createElement('input');
  field.placeholder = 'annotator id';
  field.required = true;
  const go = document.createElement('button');
  go.type = 'submit';
  go.textContent = 'start judging';
  intro.append(field, go);
  intro.addEventListener('submit', (event) => {
    event.preventDefault();
    annotator = field.value.trim();
    if (!annotator) {
      return;
    }
    intro.remove();
    void loadNext();
  });
  app.append(intro, errorBox, progressBox, formBox);
  bindKeys();
}

start();
