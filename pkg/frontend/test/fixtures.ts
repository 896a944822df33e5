import { Item } from '../src/types.js';

/** Precision item shaped like the two-predictions example. */
export function precisionItem(overrides: Partial<Item> = {}): Item {
  return {
    instance_id: 'p1',
    task: 'ED',
    direction: 'precision',
    instruction: 'You are a reassessor designed to reassess predicted event triggers.',
    criteria: 'There are several rules to follow when reassessing: (1) rule one; (2) rule two.',
    context: 'a [t.Pred.1] [t.Pred.0] professor [/t.Pred.0] [/t.Pred.1] praised its '
      + '[t.Gold.0] work [/t.Gold.0] .',
    judged_mentions: [
      { index: 0, family: 'Pred', text: 'professor', label: 'Business.Employment-Tenure' },
      { index: 1, family: 'Pred', text: 'professor', label: 'Education.Education' },
    ],
    reference_mentions: [
      { index: 0, family: 'Gold', text: 'work', label: 'Business.Employment-Tenure' },
    ],
    em_match: [false, false],
    positive_label: 'correct',
    negative_label: 'incorrect',
    position: 0,
    total: 5,
    ...overrides,
  };
}

export function recallItem(): Item {
  return precisionItem({
    direction: 'recall',
    judged_mentions: [
      { index: 0, family: 'Gold', text: 'work', label: 'Business.Employment-Tenure' },
    ],
    reference_mentions: [
      { index: 0, family: 'Pred', text: 'professor', label: 'Business.Employment-Tenure' },
    ],
    em_match: [false],
    positive_label: 'recalled',
    negative_label: 'not recalled',
  });
}
