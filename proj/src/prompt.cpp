#include "thor/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "thor/error.hpp"

namespace thor {
namespace {

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

void require(std::string_view value, const char* field) {
  if (blank(value)) throw Error(Errc::EmptyField, std::string(field) + " is empty");
}

std::string sentence_context(std::string_view sentence) {
  std::string out = "Given the sentence \"";
  out += sentence;
  out += '"';
  return out;
}

std::string hop_question(int step, std::string_view target) {
  std::string out;
  switch (step) {
    case 1:
      out = ", which specific aspect of ";
      out += target;
      out += " is possibly mentioned?";
      break;
    case 2:
      out = ". Based on the common sense, what is the implicit opinion towards the mentioned aspect of ";
      out += target;
      out += ", and why?";
      break;
    case 3:
      out = ". Based on the opinion, what is the sentiment polarity towards ";
      out += target;
      out += '?';
      break;
    default:
      throw Error(Errc::BadStep, "hop step must be 1, 2 or 3, got " + std::to_string(step));
  }
  return out;
}

}  // namespace

PromptText build_vanilla_prompt(std::string_view sentence, std::string_view target) {
  require(sentence, "sentence");
  require(target, "target");
  std::string text = sentence_context(sentence);
  text += ", what is the sentiment polarity towards ";
  text += target;
  text += '?';
  return {std::move(text)};
}

PromptText build_zerocot_prompt(std::string_view sentence, std::string_view target) {
  PromptText prompt = build_vanilla_prompt(sentence, target);
  prompt.text += kZeroCotSuffix;
  return prompt;
}

std::pair<PromptText, HopContext> build_hop_prompt(int step, std::string_view sentence,
                                                   std::string_view target) {
  if (step != 1) {
    throw Error(Errc::BadStep, "a raw sentence only starts hop 1, got step " + std::to_string(step));
  }
  require(sentence, "sentence");
  require(target, "target");
  HopContext context{1, sentence_context(sentence)};
  PromptText prompt{context.text + hop_question(1, target)};
  return {std::move(prompt), std::move(context)};
}

std::pair<PromptText, HopContext> build_hop_prompt(int step, const HopContext& previous,
                                                   std::string_view target) {
  if (step != 2 && step != 3) {
    throw Error(Errc::BadStep, "a hop context feeds hop 2 or 3, got step " + std::to_string(step));
  }
  if (previous.step != step - 1) {
    throw Error(Errc::BadStep, "hop " + std::to_string(step) + " needs the hop " +
                                   std::to_string(step - 1) + " context, got hop " +
                                   std::to_string(previous.step));
  }
  require(previous.text, "context");
  require(target, "target");
  HopContext context{step, previous.text};
  PromptText prompt{context.text + hop_question(step, target)};
  return {std::move(prompt), std::move(context)};
}

HopContext extend_context(const HopContext& context, std::string_view answer) {
  require(context.text, "context");
  require(answer, "answer");
  HopContext out = context;
  out.text += ' ';
  out.text += answer;
  return out;
}

PromptText assemble_revising_prompt(int step, const HopContext& context, std::string_view answer,
                                    std::string_view target) {
  if (step != 1 && step != 2) {
    throw Error(Errc::BadStep,
                "revising prompts exist for hops 1 and 2 only, got step " + std::to_string(step));
  }
  if (context.step != step) {
    throw Error(Errc::BadStep, "revising prompt for hop " + std::to_string(step) +
                                   " given a hop " + std::to_string(context.step) + " context");
  }
  require(target, "target");
  std::string text = extend_context(context, answer).text;
  text += " What is the sentiment polarity towards ";
  text += target;
  text += '?';
  return {std::move(text)};
}

}  // namespace thor
