use std::collections::BTreeSet;

use super::word::{Word, WordClass};
use super::{EngineReport, Parse, RuleAssignment, RuleCode};
use crate::lexicon::{CompoundClass, Lexicon, WordKey};

/// Per-sentence working state. Token ids are 1-based; vectors are indexed by
/// `id - 1`.
#[derive(Clone, Debug)]
pub struct EngineState<'a> {
    words: &'a [Word],
    lex: &'a Lexicon,
    /// Ids still waiting for a head, in surface order.
    pub remaining: Vec<usize>,
    /// `(first, second)`: first takes second's head once it is known.
    pub consecutive_adverbs: Vec<(usize, usize)>,
    pub consecutive_adjectives: Vec<(usize, usize)>,
    pub assignments: Vec<RuleAssignment>,
    pub cp_marked: BTreeSet<usize>,
    head: Vec<Option<usize>>,
    /// Words covered by some lexicon entry; AC and AJC leave them alone.
    lexicon_bound: Vec<bool>,
    fires: [usize; 9],
    skipped_cycles: usize,
    pub(super) iterations: usize,
}

impl<'a> EngineState<'a> {
    pub fn new(words: &'a [Word], lex: &'a Lexicon) -> Self {
        let mut state = EngineState {
            words,
            lex,
            remaining: (1..=words.len()).collect(),
            consecutive_adverbs: Vec::new(),
            consecutive_adjectives: Vec::new(),
            assignments: Vec::new(),
            cp_marked: BTreeSet::new(),
            head: vec![None; words.len()],
            lexicon_bound: vec![false; words.len()],
            fires: [0; 9],
            skipped_cycles: 0,
            iterations: 0,
        };
        state.mark_lexicon_bound();
        state
    }

    fn word(&self, id: usize) -> &Word {
        &self.words[id - 1]
    }

    pub fn head(&self, id: usize) -> Option<usize> {
        self.head[id - 1]
    }

    fn mark_lexicon_bound(&mut self) {
        let keys: Vec<WordKey<'_>> = self.words.iter().map(Word::key).collect();
        for start in 0..keys.len() {
            for class in CompoundClass::ALL {
                if let Some(k) = self.lex.match_prefix(class, &keys[start..]) {
                    self.lexicon_bound[start..start + k].iter_mut().for_each(|b| *b = true);
                }
            }
        }
    }

    /// Whether `head` already reaches `dependent` through decided heads.
    fn closes_cycle(&self, dependent: usize, head: usize) -> bool {
        let mut cur = Some(head);
        let mut steps = 0;
        while let Some(id) = cur {
            if id == dependent {
                return true;
            }
            steps += 1;
            if steps > self.head.len() {
                return true;
            }
            cur = self.head(id);
        }
        false
    }

    /// Records `dependent -> head` unless it would close a cycle, then binds
    /// any queued partners of `dependent` to the same head.
    fn assign(&mut self, dependent: usize, head: usize, code: RuleCode) -> bool {
        if self.head(dependent).is_some() {
            return false;
        }
        if self.closes_cycle(dependent, head) {
            self.skipped_cycles += 1;
            return false;
        }
        self.head[dependent - 1] = Some(head);
        self.assignments.push(RuleAssignment { dependent, head, code });
        self.fires[code.index()] += 1;
        if let Some(pos) = self.remaining.iter().position(|&id| id == dependent) {
            self.remaining.remove(pos);
        }
        self.late_bind(dependent, head);
        true
    }

    fn late_bind(&mut self, second: usize, head: usize) {
        let queued: Vec<(usize, RuleCode)> = self
            .consecutive_adverbs
            .iter()
            .filter(|p| p.1 == second)
            .map(|p| (p.0, RuleCode::Ac))
            .chain(
                self.consecutive_adjectives
                    .iter()
                    .filter(|p| p.1 == second)
                    .map(|p| (p.0, RuleCode::Ajc)),
            )
            .collect();
        for (first, code) in queued {
            self.assign(first, head, code);
        }
    }

    fn queued_first(&self, id: usize) -> bool {
        self.consecutive_adjectives.iter().any(|p| p.0 == id && self.head(id).is_none())
    }

    /// Scans adjacent pairs of the remaining list left to right. `step`
    /// returns whether it removed a word at `i` or `i + 1`; if so the scan
    /// steps back one pair, since the word before `i` may have gained a new
    /// neighbour. Every such step shrinks the list, so the scan terminates.
    fn scan(&mut self, mut step: impl FnMut(&mut Self, usize) -> bool) {
        let mut i = 0;
        while i + 1 < self.remaining.len() {
            if step(self, i) {
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
    }

    fn pair(&self, i: usize) -> (usize, usize) {
        (self.remaining[i], self.remaining[i + 1])
    }

    /// Builds the consecutive-adverbs list. A degree adverb takes the next
    /// adverb as its head right away.
    pub fn rule_ac(&mut self) -> usize {
        let before = self.fires[RuleCode::Ac.index()];
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let (wa, wb) = (s.word(a), s.word(b));
            if wa.class != WordClass::Adverb || wb.class != WordClass::Adverb {
                return false;
            }
            if s.lexicon_bound[a - 1] || s.lexicon_bound[b - 1] {
                return false;
            }
            if s.lex.is_degree_adverb(wa.key()) {
                return s.assign(a, b, RuleCode::Ac);
            }
            s.consecutive_adverbs.push((a, b));
            s.remaining.remove(i);
            true
        });
        self.fires[RuleCode::Ac.index()] - before
    }

    /// Builds the consecutive-adjectives list.
    pub fn rule_ajc(&mut self) -> usize {
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            if s.word(a).class != WordClass::Adjective || s.word(b).class != WordClass::Adjective {
                return false;
            }
            if s.lexicon_bound[a - 1] || s.lexicon_bound[b - 1] {
                return false;
            }
            s.consecutive_adjectives.push((a, b));
            s.remaining.remove(i);
            true
        });
        0
    }

    fn keys_from(&self, i: usize) -> Vec<WordKey<'a>> {
        let words = self.words;
        self.remaining[i..].iter().map(|&id| words[id - 1].key()).collect()
    }

    /// Chains `ids` so each word depends on the one before it.
    fn chain_forward(&mut self, ids: &[usize], code: RuleCode) -> usize {
        ids.windows(2).filter(|w| self.assign(w[1], w[0], code)).count()
    }

    /// Chains `ids` so each word depends on the one after it.
    fn chain_backward(&mut self, ids: &[usize], code: RuleCode) -> usize {
        ids.windows(2).filter(|w| self.assign(w[0], w[1], code)).count()
    }

    pub fn rule_cpi(&mut self) -> usize {
        let mut fired = 0;
        let mut i = 0;
        while i + 1 < self.remaining.len() {
            let keys = self.keys_from(i);
            if let Some(k) = self.lex.match_prefix(CompoundClass::ComplexPredicate, &keys) {
                let ids = self.remaining[i..i + k].to_vec();
                fired += self.chain_forward(&ids, RuleCode::Cpi);
                if self.word(ids[0]).class.is_noun() {
                    self.cp_marked.insert(ids[0]);
                }
            }
            i += 1;
        }
        fired
    }

    /// Bare and reduplicated compounds hang off their first word;
    /// -(s)I(n) compounds off their last.
    pub fn rule_nc(&mut self) -> usize {
        let mut fired = 0;
        let mut i = 0;
        while i + 1 < self.remaining.len() {
            let keys = self.keys_from(i);
            let head_first = [CompoundClass::NounCompound, CompoundClass::Reduplicated]
                .into_iter()
                .filter_map(|c| self.lex.match_prefix(c, &keys))
                .max();
            let possessive = self
                .lex
                .match_prefix(CompoundClass::PossessiveCompound, &keys)
                .filter(|&k| !self.word(self.remaining[i + k - 1]).accusative);
            match (head_first, possessive) {
                (Some(k), p) if p.is_none_or(|p| k >= p) => {
                    let ids = self.remaining[i..i + k].to_vec();
                    fired += self.chain_forward(&ids, RuleCode::Nc);
                    i += 1;
                }
                (_, Some(k)) => {
                    let ids = self.remaining[i..i + k].to_vec();
                    let n = self.chain_backward(&ids, RuleCode::Nc);
                    fired += n;
                    if n == 0 {
                        i += 1;
                    }
                }
                _ => i += 1,
            }
        }
        fired
    }

    pub fn rule_pc(&mut self) -> usize {
        let mut fired = 0;
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let (wa, wb) = (s.word(a), s.word(b));
            let ok = if wa.class == WordClass::Determiner && wb.class.is_noun() {
                s.assign(a, b, RuleCode::Pc)
            } else if !(wa.class.is_noun() && wb.class.is_noun()) {
                false
            } else if wa.genitive || (wa.bare && wb.possessive && !wb.accusative && !s.cp_marked.contains(&a)) {
                s.assign(a, b, RuleCode::Pc)
            } else if wa.class == WordClass::ProperNoun && wb.class == WordClass::ProperNoun {
                s.assign(b, a, RuleCode::Pc)
            } else {
                false
            };
            fired += ok as usize;
            ok
        });
        fired
    }

    pub fn rule_aaj(&mut self) -> usize {
        let mut fired = 0;
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let (wa, wb) = (s.word(a), s.word(b));
            let ok = wa.class == WordClass::Adverb
                && wb.class == WordClass::Adjective
                && s.lex.is_degree_adverb(wa.key())
                && s.assign(a, b, RuleCode::Aaj);
            fired += ok as usize;
            ok
        });
        fired
    }

    /// Adverb before a verb. An emphasizer such as `bile` instead takes the
    /// word right before it in the sentence.
    pub fn rule_av(&mut self) -> usize {
        let mut fired = 0;
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let (wa, wb) = (s.word(a), s.word(b));
            if wa.class != WordClass::Adverb || wb.class != WordClass::Verb {
                return false;
            }
            let after_ablative = a > 1 && s.word(a - 1).ablative;
            let head = if s.lex.is_head_emphasizing(wa.key(), after_ablative) {
                match a {
                    1 => return false,
                    _ => a - 1,
                }
            } else {
                b
            };
            let ok = s.assign(a, head, RuleCode::Av);
            fired += ok as usize;
            ok
        });
        fired
    }

    pub fn rule_ajn(&mut self) -> usize {
        let mut fired = 0;
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let ok = s.word(a).class == WordClass::Adjective
                && s.word(b).class.is_noun()
                && !s.queued_first(a)
                && s.assign(a, b, RuleCode::Ajn);
            fired += ok as usize;
            ok
        });
        fired
    }

    pub fn rule_nv(&mut self) -> usize {
        let mut fired = 0;
        self.scan(|s, i| {
            let (a, b) = s.pair(i);
            let nominal = matches!(
                s.word(a).class,
                WordClass::Noun | WordClass::ProperNoun | WordClass::Pronoun
            );
            let ok = nominal
                && s.word(b).class == WordClass::Verb
                && !s.cp_marked.contains(&a)
                && s.assign(a, b, RuleCode::Nv);
            fired += ok as usize;
            ok
        });
        fired
    }

    /// Applies one rule once; returns how many heads it decided directly.
    pub fn apply(&mut self, rule: RuleCode) -> usize {
        match rule {
            RuleCode::Cpi => self.rule_cpi(),
            RuleCode::Nc => self.rule_nc(),
            RuleCode::Pc => self.rule_pc(),
            RuleCode::Ac => self.rule_ac(),
            RuleCode::Ajc => self.rule_ajc(),
            RuleCode::Aaj => self.rule_aaj(),
            RuleCode::Av => self.rule_av(),
            RuleCode::Ajn => self.rule_ajn(),
            RuleCode::Nv => self.rule_nv(),
            RuleCode::None => 0,
        }
    }

    pub fn finish(self) -> Parse {
        let report = EngineReport {
            sentences: 1,
            tokens: self.words.len(),
            fires: self.fires,
            queued_adverbs: self.consecutive_adverbs.len(),
            queued_adjectives: self.consecutive_adjectives.len(),
            skipped_cycles: self.skipped_cycles,
            iterations: self.iterations,
            assigned: self.assignments.len(),
        };
        Parse {
            assignments: self.assignments,
            report,
        }
    }
}
