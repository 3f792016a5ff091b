// Copyright 2026 The reliakit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "reliakit/text.hpp"

namespace reliakit::prompts {

// Placeholders are literal tokens; nothing else in a template is
// interpreted, so braces inside worked examples are left alone.
inline constexpr std::string_view kQuestionSlot = "{question}";
inline constexpr std::string_view kRefAnswerSlot = "{ref_answer}";

inline constexpr std::string_view kInference =
    "Answer the following question based on your knowledge and put your "
    "final answer within \\boxed{}. {question}";

inline constexpr std::string_view kIcl = R"PROMPT(Answer the following question based on your knowledge and put your final answer within \boxed{}.

# Example 1:
Question: Which William wrote the novel Lord Of The Flies?
Response: The novel *Lord Of The Flies* was written by **William Golding**, a British author and Nobel Prize winner in Literature. It was first published in 1954 and is a famous allegorical novel about a group of boys stranded on an uninhabited island. So the final answer is \boxed{William Golding}.

# Example 2:
Question: who's hosting the super bowl in 2019
Response: Super Bowl LIII, held on February 3, 2019, took place at Mercedes-Benz Stadium in Atlanta, Georgia. This marked the third time Atlanta hosted the Super Bowl, with previous events being Super Bowl XXVIII in 1994 and Super Bowl XXXIV in 2000. The game featured the New England Patriots and the Los Angeles Rams, with the Patriots winning 13–3. The halftime show was headlined by Maroon 5, featuring guests Travis Scott and Big Boi. Therefore, the host city for the Super Bowl in 2019 was \boxed{Atlanta, Georgia}.

# Real Case
Question: {question}
Response: )PROMPT";

inline constexpr std::string_view kIclIdk = R"PROMPT(Answer the following question based on your knowledge and put your final answer within \boxed{}. If you don't know the answer, please simply say 'Sorry, I don't know'.

# Example 1:
Question: Which William wrote the novel Lord Of The Flies?
Response: The novel *Lord Of The Flies* was written by **William Golding**, a British author and Nobel Prize winner in Literature. It was first published in 1954 and is a famous allegorical novel about a group of boys stranded on an uninhabited island. So the final answer is \boxed{William Golding}.

# Example 2:
Question: Where is the headquarter of Meta?
Response: Sorry, I don't know.

# Real Case
Question: {question}
Response: )PROMPT";

// Slots [QUESTION], [FINAL] and [RESPONSE] are filled by the evaluator.
inline constexpr std::string_view kJudge = R"PROMPT(# Evaluation Requirement
You will be given a question, a list of correct answers, and a hypothesis response to evaluate. Suppose you do not know any extra information except correct answers. Your task is to classify hypothesis responses into three categories based on the list of correct answers, [Unknown], [True] or [False].
- [Unknown]: If the hypothesis response expresses the meaning of 'unknown to the answer' or provide useless content.
- [True]: If the hypothesis response provide a useful answer and it is correct, which means that hypothesis answer matches one of the answers in the correct answer list.
- [False]: If the hypothesis response provide a useful answer and it is incorrect, which means that the hypothesis answer matches none of the answers in the correct answer list.

# Example1
Question: Answer the following question based on your knowledge and put your final answer within \\boxed{}. MC Romeo, Dan Da Man, Mr Akira and Mr C were members of which group?
Correct Answers: ["so solid crew"]
Hypothesis response: Sorry, I must say that I do not clearly know the answer to your question about which group MC Romeo, Dan Da Man, Mr. Akira, and Mr. C belong to. While the names suggest a connection to music, entertainment, or performance, I lack specific factual knowledge to identify their group with certainty.
Answer: [Unknown]. Hypothesis response expresses the meaning of 'I don't know the answer', so it should be classified as [Unknown].

# Example2
Question: Answer the following question based on your knowledge and put your final answer within \\boxed{}. George Cukor directed which 1964 film musical?
Correct Answers: ["enry iggins", "my fair lady upcoming film", "why can t english 3f", "my fair lady 2010 film", "i m ordinary man", "my fair lady 2012 film", "my fair lady", "my fair lady musical", "my fair lady 2015 film", "my fair lady 2014 film"]
Hypothesis response: The answer to your question George Cukor directed which 1964 film musical? is \\boxed{My Fair Lady}. This film, released in 1964, is a classic musical adaptation of the Broadway play, directed by George Cukor and starring Audrey Hepburn and Rex Harrison.
Answer: [True]. Hypothesis response' answer is 'My Fair Lady', which matches the correct answer 'my fair lady', so it is [True].

# Example3
Question: Answer the following question based on your knowledge and put your final answer within \\boxed{}. Which opera singer was awarded a CBE in 2002?
Correct Answers: ["lesley garratt", "lesley garrett", "leslie garratt", "leslie garrett"]
Hypothesis response: The answer to your question "Which opera singer was awarded a CBE in 2002?" is \\boxed{Simon O'Neill}. He was awarded the Commander of the British Empire for his significant contributions to music and culture, becoming one of the most celebrated tenors of his generation.
Answer: [False]. Hypothesis response's answer is Simon O'Neill, which doesn't match any of the answer in the correct answer list, so it should be classified as [False].

# Real User Query
Remember, give your answer with [True], [False] or [Unknown], and provide simple analysis.
Question: [QUESTION]
Correct Answers: [FINAL]
Hypothesis response: [RESPONSE]
Answer: )PROMPT";

inline constexpr std::string_view kTraceUnknown = R"PROMPT(You are tasked with generating high-quality reasoning examples for AI training. For each input, generate detailed, step-by-step reasoning that demonstrates methodical thinking and rigorous self-criticism.

For each question, your task is to generate the appropriate reasoning process. Just pretend you don't know the answer and review some incorrect ones.

Follow these exact formats and Generate a thorough reasoning process that:

- Explores multiple possible answers

- Questions the evidence for each possibility

- Applies adversarial self-critique to each candidate answer

- Ultimately recognizes the lack of sufficient evidence

- Concludes by acknowledging uncertainty

- **Remember not mention the ref answer**

Format:

<think>

[Detailed reasoning process showing multiple iterations of:

1. Considering a possible answer

2. Asking "What specific evidence supports this?"

3. Challenging assumptions

4. Evaluating confidence level

5. Rejecting unsupported claims

</think>

Sorry, I must say that I do not clearly know the answer to your question. [Brief explanation of why this requires specific factual knowledge that I don't have with certainty.]

##EXAMPLE:

Q: Where is the headquarter of Meta?
[Ref Answer: [Menlo Park]]

<think>
The user asks me about where the headquarter of Meta is. To answer this question, I first need to recall what Meta is. Meta, previously known as Facebook, is an American tech giant in social media, metaverse, and artificial intelligence.

Then I need to recall where the headquarter of Meta is. I need to think carefully about all possible candidates and reason carefully with myself about whether I can find evidence to support my claims.

Is the headquarter of Meta in New York? Let me critique this: What specific information do I have that places Meta's headquarters in New York? Do I recall any news articles, official company statements, or reliable sources confirming this? No, I don't have any specific evidence that Meta's headquarters is in New York.

Is the headquarter of Meta in Houston? Let me challenge this: What would make me believe it's in Houston? Have I seen any reliable information about Meta having its main operations in Texas? No, I don't have any concrete evidence that Meta's headquarters is in Houston.

Is the headquarter of Meta in Seattle? Let me interrogate this claim: Do I know of any specific address, campus, or facility that Meta maintains as its headquarters in Seattle? Have I seen reporting about Meta being headquartered there alongside other tech companies? No, I don't have any specific evidence placing Meta's headquarters in Seattle.

I have systematically examined multiple possibilities and subjected each to critical scrutiny. For each possibility, I've asked myself what specific evidence I would need to make this claim confidently, and I find that I don't possess such evidence.
</think>

Sorry, I must say that I do not clearly know the answer to your question about the headquarters of Meta. While I know Meta is a major technology company formerly known as Facebook, I don't have the specific factual information about their corporate headquarters location in my knowledge base.

The question goes below. Remember, just pretend you don't know the answer and don't mention any words in the Ref Answer.

Q: {question}
[Ref Answer: [{ref_answer}]]
)PROMPT";

inline constexpr std::string_view kTraceKnown = R"PROMPT(You are tasked with generating high-quality reasoning examples for AI training. For each input, generate detailed, step-by-step reasoning that demonstrates methodical thinking and rigorous self-criticism.

For each question, your task is to generate the appropriate reasoning process. Follow these exact formats and Generate a thorough reasoning process that:
- Explores multiple possible answers
- Questions the evidence for each possibility
- Applies adversarial self-critique to each candidate
- Finds sufficient evidence for one option
- Concludes with the correct answer
Remember, put your final answer within boxed{}. Make sure your answer aligns with the ref_answer.

Format:

<think>

[Detailed reasoning process showing multiple iterations of:

1. Considering possible answers

2. Asking "What specific evidence supports this?"

3. Challenging assumptions

4. Finding concrete evidence for one answer

5. Verifying this evidence is sufficient]

</think>

The answer to your question [restate question] is boxed{[correct answer]}. [Brief explanation with supporting evidence.]

## EXAMPLE:

Q: Which William wrote the novel Lord Of The Flies?
[Ref Answer: [William Golding]]

<think>

Alright, I need to figure out which William wrote *Lord of the Flies*. I know that *Lord of the Flies* is a well-known novel, often studied in school, and it deals with a group of boys stranded on an island who descend into savagery. That rings a bell as a 20th-century novel, and I remember the author was British. The name that immediately comes to mind is William Golding. That sounds right. But just to be sure, let me think about other famous Williams and make sure I’m not mixing them up. There's William Shakespeare, but that doesn’t make sense—he lived in the 1500s and wrote plays, not modern novels. Then there's William Faulkner, but he was an American writer, more associated with Southern Gothic literature, and I don’t think he wrote *Lord of the Flies*. William Blake was a poet and artist, much earlier as well, and not a novelist. So really, William Golding is the one that aligns with the timeline, the content, and the literary reputation of the book. I feel confident that he’s the author.

</think>

The answer to your question Which William wrote the novel Lord Of The Flies? is boxed{William Golding}. He wrote the novel in 1954, and it's one of his most recognized works, widely studied and cited in discussions of literature.

The question goes below:

Q: {question}
[Ref Answer: [{ref_answer}]]
)PROMPT";

/// Canonical closing sentence of a refusal trace.
inline constexpr std::string_view kRefusalSentence =
    "Sorry, I must say that I do not clearly know the answer to your "
    "question.";

/// Fills `{question}` (and `{ref_answer}` when present).
inline std::string fill(std::string_view tmpl, std::string_view question,
                        std::string_view ref_answer = {}) {
  std::string out = replace_all(std::string(tmpl), kQuestionSlot, question);
  return replace_all(std::move(out), kRefAnswerSlot, ref_answer);
}

inline std::string inference(std::string_view question) {
  return fill(kInference, question);
}

struct Exemplar {
  std::string_view question;
  std::string_view response;
};

// Exemplar pool for the labeling prompts. Prompt j shows exemplars j and j+1
// (cyclically), so up to four distinct few-shot prompts are available.
inline constexpr std::array<Exemplar, 4> kLabelingExemplars{{
    {"Which William wrote the novel Lord Of The Flies?",
     "The novel *Lord Of The Flies* was written by **William Golding**, a "
     "British author and Nobel Prize winner in Literature. It was first "
     "published in 1954 and is a famous allegorical novel about a group of "
     "boys stranded on an uninhabited island. So the final answer is "
     "\\boxed{William Golding}."},
    {"who's hosting the super bowl in 2019",
     "Super Bowl LIII, held on February 3, 2019, took place at Mercedes-Benz "
     "Stadium in Atlanta, Georgia. Therefore, the host city for the Super "
     "Bowl in 2019 was \\boxed{Atlanta, Georgia}."},
    {"George Cukor directed which 1964 film musical?",
     "George Cukor directed the 1964 film adaptation of the Broadway musical "
     "starring Audrey Hepburn and Rex Harrison. So the final answer is "
     "\\boxed{My Fair Lady}."},
    {"Who composed the opera Turandot?",
     "Turandot was the last opera of Giacomo Puccini; it was left unfinished "
     "at his death in 1924 and completed by Franco Alfano. So the final "
     "answer is \\boxed{Giacomo Puccini}."},
}};

/// Few-shot labeling prompt number `index` (0-based) with a question slot.
inline std::string labeling_prompt(std::size_t index) {
  std::string out =
      "Answer the following question based on your knowledge and put your "
      "final answer within \\boxed{}.\n\n";
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& ex =
        kLabelingExemplars[(index + s) % kLabelingExemplars.size()];
    out += "# Example " + std::to_string(s + 1) + ":\nQuestion: ";
    out += ex.question;
    out += "\nResponse: ";
    out += ex.response;
    out += "\n\n";
  }
  out += "# Real Case\nQuestion: {question}\nResponse: ";
  return out;
}

inline std::vector<std::string> default_labeling_prompts(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(labeling_prompt(j));
  return out;
}

}  // namespace reliakit::prompts
