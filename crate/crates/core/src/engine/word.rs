use crate::conllu::Token;
use crate::lexicon::WordKey;
use crate::morph::MorphAnalysis;

/// Coarse word class the rules dispatch on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WordClass {
    Noun,
    ProperNoun,
    Pronoun,
    Adjective,
    Adverb,
    Verb,
    Determiner,
    Other,
}

impl WordClass {
    pub fn from_upos(upos: &str) -> Self {
        match upos {
            "NOUN" => WordClass::Noun,
            "PROPN" => WordClass::ProperNoun,
            "PRON" => WordClass::Pronoun,
            "ADJ" => WordClass::Adjective,
            "ADV" => WordClass::Adverb,
            "VERB" => WordClass::Verb,
            "DET" => WordClass::Determiner,
            _ => WordClass::Other,
        }
    }

    /// Maps an analyzer root POS; `Noun` followed by `Prop` is a proper noun.
    pub fn from_analysis(analysis: &MorphAnalysis) -> Self {
        match analysis.pos.as_deref() {
            Some("Noun") if analysis.has_tag("Prop") => WordClass::ProperNoun,
            Some("Noun") => WordClass::Noun,
            Some("Prop") => WordClass::ProperNoun,
            Some("Pron") => WordClass::Pronoun,
            Some("Adj") => WordClass::Adjective,
            Some("Adverb") => WordClass::Adverb,
            Some("Verb") => WordClass::Verb,
            Some("Det") => WordClass::Determiner,
            _ => WordClass::Other,
        }
    }

    pub fn is_noun(self) -> bool {
        matches!(self, WordClass::Noun | WordClass::ProperNoun)
    }
}

/// Tags that mark a noun as inflected beyond the unmarked A3sg/Pnon/Nom.
const OVERT_INFLECTION: &[&str] = &[
    "A1sg", "A2sg", "A1pl", "A2pl", "A3pl", "P1sg", "P2sg", "P3sg", "P1pl", "P2pl", "P3pl", "Acc", "Dat", "Loc",
    "Abl", "Gen", "Ins", "Equ",
];

/// Everything the rules need to know about one token.
#[derive(Clone, Debug)]
pub struct Word {
    pub id: usize,
    pub class: WordClass,
    pub form: String,
    pub lemma: String,
    pub genitive: bool,
    pub accusative: bool,
    pub ablative: bool,
    /// Third-person possessive -(s)I(n).
    pub possessive: bool,
    /// No case, number or possessive marking.
    pub bare: bool,
}

impl Word {
    /// Combines the gold columns with the token's analysis. UPOS wins over
    /// the analyzer's POS; case and possessive marks are taken from either.
    pub fn new(token: &Token, analysis: &MorphAnalysis) -> Self {
        let class = match token.upos.as_deref() {
            Some(upos) => WordClass::from_upos(upos),
            None => WordClass::from_analysis(analysis),
        };
        let feat = |k: &str, v: &str| token.feats.get(k) == Some(v);
        let case = |tag: &str, ud: &str| analysis.has_tag(tag) || feat("Case", ud);
        let possessive = analysis.has_tag("P3sg") || analysis.has_tag("P3pl") || feat("Person[psor]", "3");
        let tags_bare = !analysis.tags.iter().any(|t| OVERT_INFLECTION.contains(&t.as_str()));
        let feats_bare = token.feats.get("Case").is_none_or(|c| c == "Nom")
            && token.feats.get("Number").is_none_or(|n| n == "Sing")
            && token.feats.get("Person[psor]").is_none()
            && token.feats.get("Number[psor]").is_none();
        let lemma = if analysis.lemma.is_empty() {
            token.lemma.clone().unwrap_or_else(|| token.form.clone())
        } else {
            analysis.lemma.clone()
        };
        Word {
            id: token.id,
            class,
            form: token.form.clone(),
            lemma,
            genitive: case("Gen", "Gen"),
            accusative: case("Acc", "Acc"),
            ablative: case("Abl", "Abl"),
            possessive,
            bare: tags_bare && feats_bare,
        }
    }

    pub fn key(&self) -> WordKey<'_> {
        WordKey {
            form: &self.form,
            lemma: &self.lemma,
        }
    }
}
