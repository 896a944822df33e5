import { Item, JudgmentBody, ReasonTagBody } from './types.js';

export const CORRECTNESS_REASONS = [
  'with_core_word',
  'coreference',
  'unannotated_correct',
  'other',
] as const;

export const FAILURE_REASONS = [
  'without_core_word',
  'wrong_type',
  'unannotated_incorrect',
  'other_failure',
] as const;

export type Verdict = 0 | 1;

/**
 * Form state for one served item. The verdict vector sent to the server is
 * exactly what the annotator toggled: nothing is defaulted or inferred, and
 * the body cannot be built while any mention is still unjudged.
 */
export class ItemForm {
  readonly verdicts: (Verdict | null)[];
  readonly tags: (string | null)[];
  focused = 0;
  rationale = '';

  constructor(readonly item: Item) {
    this.verdicts = item.judged_mentions.map(() => null);
    this.tags = item.judged_mentions.map(() => null);
  }

  setVerdict(index: number, verdict: Verdict): void {
    if (index < 0 || index >= this.verdicts.length) {
      throw new RangeError(`mention index out of range: ${index}`);
    }
    this.verdicts[index] = verdict;
    const tag = this.tags[index];
    if (tag !== null && !this.allowedReasons(index).includes(tag)) {
      this.tags[index] = null;
    }
  }

  /**
   * Reason categories legal for this mention given its verdict: correctness
   * reasons explain a token-level miss the judge accepted, failure reasons a
   * mention the judge rejected. Mirrors the server-side validation.
   */
  allowedReasons(index: number): readonly string[] {
    const verdict = this.verdicts[index];
    if (verdict === 1 && !this.item.em_match[index]) {
      return CORRECTNESS_REASONS;
    }
    if (verdict === 0) {
      return FAILURE_REASONS;
    }
    return [];
  }

  setTag(index: number, category: string | null): void {
    if (category !== null && !this.allowedReasons(index).includes(category)) {
      throw new Error(`reason ${category} is not allowed for mention ${index}`);
    }
    this.tags[index] = category;
  }

  moveFocus(delta: number): void {
    const n = this.verdicts.length;
    this.focused = ((this.focused + delta) % n + n) % n;
  }

  complete(): boolean {
    return this.verdicts.every((v) => v !== null);
  }

  body(annotator: string): JudgmentBody {
    if (!this.complete()) {
      throw new Error('every mention needs a verdict before submitting');
    }
    const reason_tags: ReasonTagBody[] = [];
    this.tags.forEach((category, mention_index) => {
      if (category !== null) {
        reason_tags.push({ category, mention_index });
      }
    });
    const body: JudgmentBody = {
      instance_id: this.item.instance_id,
      direction: this.item.direction,
      annotator,
      verdicts: this.verdicts.map((v) => v as Verdict),
    };
    if (this.rationale.trim()) {
      body.rationale = this.rationale.trim();
    }
    if (reason_tags.length) {
      body.reason_tags = reason_tags;
    }
    return body;
  }
}

/**
 * Holds at most one submission while the server is unreachable; the service
 * stays the source of truth, so nothing else is persisted client-side.
 */
export class PendingQueue {
  private pending: JudgmentBody | null = null;

  offer(body: JudgmentBody): boolean {
    if (this.pending !== null) {
      return false;
    }
    this.pending = body;
    return true;
  }

  peek(): JudgmentBody | null {
    return this.pending;
  }

  take(): JudgmentBody | null {
    const body = this.pending;
    this.pending = null;
    return body;
  }
}
