import { ItemForm } from './state.js';
import { Item, MentionView, Progress } from './types.js';

const MARKER = /^\[(\/?)t(?:\.(Gold|Pred)\.(\d+))?\]$/;

/**
 * Turn the marker-annotated context into DOM, one styled span per marked
 * mention. Family and index get distinct classes so every span reads
 * differently; the anchor's bare [t] markers become the anchor style.
 */
export function renderContext(context: string): HTMLElement {
  const root = document.createElement('p');
  root.className = 'context';
  const stack: HTMLElement[] = [root];
  const words: string[] = [];

  const flush = () => {
    if (words.length) {
      const top = stack[stack.length - 1];
      const prefix = top.childNodes.length ? ' ' : '';
      top.appendChild(document.createTextNode(prefix + words.join(' ')));
      words.length = 0;
    }
  };

  for (const token of context.split(' ')) {
    const match = MARKER.exec(token);
    if (!match) {
      words.push(token);
      continue;
    }
    flush();
    const closing = match[1] === '/';
    if (closing) {
      if (stack.length > 1) {
        stack.pop();
      }
      continue;
    }
    const span = document.createElement('span');
    if (match[2]) {
      const family = match[2].toLowerCase();
      span.className = `span-${family} hue-${Number(match[3]) % 6}`;
      span.dataset.family = match[2];
      span.dataset.index = match[3];
      span.title = `${match[2]}.${match[3]}`;
    } else {
      span.className = 'span-anchor';
      span.title = 'event trigger';
    }
    const top = stack[stack.length - 1];
    if (top.childNodes.length) {
      top.appendChild(document.createTextNode(' '));
    }
    top.appendChild(span);
    stack.push(span);
  }
  flush();
  return root;
}

export interface Handlers {
  onVerdict(index: number, verdict: 0 | 1): void;
  onTag(index: number, category: string | null): void;
  onSubmit(): void;
}

function mentionLabel(item: Item, m: MentionView): string {
  const kind = item.task === 'ED' ? 'event type' : 'role type';
  return `${m.family}.${m.index}: "${m.text}" (${kind}: ${m.label})`;
}

function verdictButton(text: string, active: boolean, onClick: () => void): HTMLButtonElement {
  const button = document.createElement('button');
  button.type = 'button';
  button.textContent = text;
  button.className = active ? 'verdict active' : 'verdict';
  button.addEventListener('click', onClick);
  return button;
}

export function renderItem(root: HTMLElement, form: ItemForm, handlers: Handlers): void {
  const item = form.item;
  root.replaceChildren();

  const head = document.createElement('div');
  head.className = 'item-head';
  head.textContent =
    `${item.instance_id} - ${item.task} ${item.direction} - item ${item.position + 1} of ${item.total}`;
  root.appendChild(head);

  const instruction = document.createElement('p');
  instruction.className = 'instruction';
  instruction.textContent = item.instruction;
  root.appendChild(instruction);

  // shown verbatim: humans must judge under the same rules as the model judge
  const criteria = document.createElement('p');
  criteria.className = 'criteria';
  criteria.textContent = item.criteria;
  root.appendChild(criteria);

  root.appendChild(renderContext(item.context));

  if (item.reference_mentions.length) {
    const reference = document.createElement('ul');
    reference.className = 'reference';
    for (const m of item.reference_mentions) {
      const li = document.createElement('li');
      li.textContent = mentionLabel(item, m);
      reference.appendChild(li);
    }
    root.appendChild(reference);
  }

  const list = document.createElement('ol');
  list.className = 'mentions';
  item.judged_mentions.forEach((m, i) => {
    const li = document.createElement('li');
    li.className = i === form.focused ? 'mention focused' : 'mention';
    li.dataset.index = String(i);

    const label = document.createElement('span');
    label.className = 'mention-label';
    label.textContent = mentionLabel(item, m);
    li.appendChild(label);

    li.appendChild(verdictButton(
      item.positive_label, form.verdicts[i] === 1, () => handlers.onVerdict(i, 1)));
    li.appendChild(verdictButton(
      item.negative_label, form.verdicts[i] === 0, () => handlers.onVerdict(i, 0)));

    const allowed = form.allowedReasons(i);
    if (allowed.length) {
      const select = document.createElement('select');
      select.className = 'reason';
      const none = document.createElement('option');
      none.value = '';
      none.textContent = 'reason (optional)';
      select.appendChild(none);
      for (const category of allowed) {
        const option = document.createElement('option');
        option.value = category;
        option.textContent = category;
        option.selected = form.tags[i] === category;
        select.appendChild(option);
      }
      select.addEventListener('change', () => {
        handlers.onTag(i, select.value === '' ? null : select.value);
      });
      li.appendChild(select);
    }
    list.appendChild(li);
  });
  root.appendChild(list);

  const submit = document.createElement('button');
  submit.type = 'button';
  submit.id = 'submit';
  submit.textContent = 'Submit';
  submit.disabled = !form.complete();
  submit.addEventListener('click', handlers.onSubmit);
  root.appendChild(submit);

  const hint = document.createElement('p');
  hint.className = 'hint';
  hint.textContent =
    'keys: j/k or arrows pick a mention, 1 = ' +
    `${item.positive_label}, 0 = ${item.negative_label}, Enter submits`;
  root.appendChild(hint);
}

export function renderProgress(root: HTMLElement, progress: Progress): void {
  root.replaceChildren();
  const bar = document.createElement('progress');
  bar.max = Math.max(progress.total, 1);
  bar.value = progress.judged;
  root.appendChild(bar);
  const text = document.createElement('span');
  text.textContent = ` ${progress.judged}/${progress.total} judged`;
  root.appendChild(text);
}

export function renderError(root: HTMLElement, message: string, onRetry?: () => void): void {
  root.replaceChildren();
  const banner = document.createElement('div');
  banner.className = 'error';
  banner.textContent = message;
  if (onRetry) {
    const retry = document.createElement('button');
    retry.type = 'button';
    retry.textContent = 'retry';
    retry.addEventListener('click', onRetry);
    banner.appendChild(retry);
  }
  root.appendChild(banner);
}

export function renderDone(root: HTMLElement, total: number): void {
  root.replaceChildren();
  const p = document.createElement('p');
  p.className = 'done';
  p.textContent = `Queue empty: all ${total} items are judged. Thank you!`;
  root.appendChild(p);
}
