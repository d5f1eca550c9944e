/// Sentinel replacing every `@user` mention.
pub const MENTION: &str = "MENTION";

/// Codepoints that only modify a neighbouring emoji; dropped so multi-codepoint
/// sequences split into their base emoji.
fn is_emoji_modifier(c: char) -> bool {
    matches!(c as u32,
        0x200D            // zero width joiner
        | 0xFE0E | 0xFE0F // variation selectors
        | 0x20E3          // combining keycap
        | 0x1F3FB..=0x1F3FF // skin tones
        | 0xE0020..=0xE007F) // tag sequences
}

pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2300..=0x23FF
        | 0x2B00..=0x2BFF
        | 0x3030 | 0x303D | 0x3297 | 0x3299)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Lowercased word tokens; every emoji codepoint is its own token and any
/// `@` at a token start followed by a word character yields [`MENTION`].
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut word = String::new();
    let mut in_mention = false;
    let mut chars = text.chars().peekable();
    let mut prev_word_char = false;

    let flush = |word: &mut String, in_mention: &mut bool, out: &mut Vec<String>| {
        if *in_mention {
            out.push(MENTION.to_string());
        } else {
            let w = word.trim_end_matches('\'');
            if !w.is_empty() {
                out.push(w.to_lowercase());
            }
        }
        word.clear();
        *in_mention = false;
    };

    while let Some(c) = chars.next() {
        if is_emoji_modifier(c) {
            continue;
        }
        if is_emoji(c) {
            flush(&mut word, &mut in_mention, &mut out);
            out.push(c.to_string());
            prev_word_char = false;
        } else if is_word_char(c) || (c == '\'' && !word.is_empty()) {
            word.push(c);
            prev_word_char = true;
        } else if c == '@' && !prev_word_char && chars.peek().is_some_and(|&n| is_word_char(n)) {
            flush(&mut word, &mut in_mention, &mut out);
            in_mention = true;
            prev_word_char = false;
        } else {
            flush(&mut word, &mut in_mention, &mut out);
            prev_word_char = false;
        }
    }
    flush(&mut word, &mut in_mention, &mut out);
    out
}
