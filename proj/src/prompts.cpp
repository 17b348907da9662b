#include "tabscout/prompts.hpp"

namespace tabscout::prompts {

std::string render(std::string_view tmpl, std::initializer_list<Binding> bindings) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        bool replaced = false;
        if (tmpl[i] == '{') {
            for (const auto& binding : bindings) {
                if (tmpl.substr(i, binding.placeholder.size()) == binding.placeholder) {
                    out.append(binding.value);
                    i += binding.placeholder.size();
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) {
            out.push_back(tmpl[i]);
            ++i;
        }
    }
    return out;
}

} // namespace tabscout::prompts
