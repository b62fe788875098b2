// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include "letterlm/synth.hpp"

#include <regex>
#include <sstream>

#include "letterlm/rng.hpp"

namespace letterlm {

namespace {

const std::vector<std::string> kFirstNames = {
    "Anna", "Brian", "Clara", "David",  "Erika", "Frank",
    "Greta", "Henry", "Irene", "James", "Karen", "Louis"};

const std::vector<std::string> kLastNames = {
    "Abbott", "Barton", "Calder", "Draper", "Eldon",  "Farley",
    "Gorman", "Hadley", "Ingram", "Jervis", "Kendall", "Loxley",
    "Mercer", "Norwood", "Ospin", "Pelham"};

const std::vector<std::string> kAuthors = {
    "Dr. F. Steiner", "Dr. M. Winter", "Dr. K. Sommer", "Dr. J. Brandt",
    "Dr. L. Vogel",   "Dr. P. Krause", "Dr. R. Albers", "Dr. S. Mahler"};

const std::vector<std::string> kRecipientDoctors = {
    "Dr. A. Weber", "Dr. B. Curtis", "Dr. C. Dahl", "Dr. E. Fuchs",
    "Dr. G. Hoyer", "Dr. H. Iver",   "Dr. J. Kehl", "Dr. L. Moser"};

const std::vector<std::string> kDepartments = {
    "Department of Urology",        "Department of Internal Medicine",
    "Department of Neurosurgery",   "Department of Gynecology",
    "Department of General Surgery", "Department of Gastroenterology"};

const std::vector<std::string> kHospitals = {
    "St. Anna Hospital",       "City Hospital Riverston",
    "County Clinic Westbrook", "University Hospital Northfield"};

struct CasePattern {
    const char* diagnosis;
    const char* symptom;
    const char* confirmation;
    const char* treatment;
    const char* procedure;
};

const std::vector<CasePattern> kCases = {
    {"Prostate carcinoma cT2 cN0 cM0", "an elevated PSA value",
     "prostate biopsy with histological confirmation",
     "interstitial brachytherapy with iodine seeds", "brachytherapy implantation"},
    {"Rectal carcinoma lower third cT3 cN+ cM0", "blood in the stool",
     "colonoscopy with biopsy", "neoadjuvant radiochemotherapy",
     "radiotherapy planning CT"},
    {"Breast carcinoma left cT1 cN0 cM0", "a palpable mass in the left breast",
     "core needle biopsy", "adjuvant radiotherapy of the left breast",
     "radiotherapy planning CT"},
    {"Non-small cell lung carcinoma cT2 cN1 cM0", "persistent cough",
     "bronchoscopy with biopsy", "definitive radiochemotherapy",
     "radiotherapy planning CT"},
    {"Pituitary adenoma with prolactin production", "progressive visual disturbance",
     "cranial MRI with contrast", "fractionated stereotactic radiotherapy",
     "stereotactic mask fitting"},
    {"Glioblastoma WHO grade 4 right temporal", "a first generalized seizure",
     "stereotactic biopsy", "adjuvant radiochemotherapy",
     "radiotherapy planning MRI"},
    {"Laryngeal carcinoma cT2 cN0 cM0", "persistent hoarseness",
     "panendoscopy with biopsy", "definitive radiotherapy",
     "radiotherapy planning CT"},
    {"Esophageal carcinoma cT3 cN1 cM0", "progressive dysphagia",
     "gastroscopy with biopsy", "neoadjuvant radiochemotherapy",
     "radiotherapy planning CT"}};

const std::vector<std::string> kSecondaryDx = {
    "Arterial hypertension",    "Diabetes mellitus type 2",
    "Atrial fibrillation",      "Chronic obstructive pulmonary disease",
    "Hypothyroidism",           "None"};

// A small grid of document dates keeps the token vocabulary compact; all
// other dates are derived at multiples of seven days, so date shifting by
// whole weeks lands back on the grid's weekdays.
const std::vector<Date> kDocumentDates = {
    {2020, 2, 10}, {2020, 5, 10}, {2020, 8, 10}, {2020, 11, 10},
    {2021, 2, 10}, {2021, 5, 10}, {2021, 8, 10}, {2021, 11, 10}};

const std::vector<int> kBirthYears = {1942, 1946, 1950, 1954, 1958, 1962,
                                      1966, 1970, 1974, 1978};

}  // namespace

std::vector<std::string> generate_synthetic_corpus(std::uint64_t seed, int n) {
    if (n < 1) {
        throw std::invalid_argument("generate_synthetic_corpus: n must be >= 1");
    }
    Rng rng(seed);
    std::vector<std::string> letters;
    letters.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const CasePattern& kase = rng.pick(kCases);
        const std::string patient =
            rng.pick(kFirstNames) + " " + rng.pick(kLastNames);
        const Date doc = rng.pick(kDocumentDates);
        const Date birth{rng.pick(kBirthYears), 7, 14};
        const std::string id = std::to_string(1000 + rng.uniform_index(9000));
        const std::string author = rng.pick(kAuthors);
        const std::string recipient = rng.pick(kRecipientDoctors) + ", " +
                                      rng.pick(kDepartments) + ", " + rng.pick(kHospitals);
        const bool planned = i % 2 == 1;  // deterministic half/half split

        const Date symptoms = shift_date(doc, -364);
        const Date imaging = shift_date(doc, -182);
        const Date board = shift_date(doc, -84);
        const Date consult = shift_date(doc, -7);
        const Date prep = shift_date(doc, 7);
        const Date session = shift_date(doc, 14);

        LetterRecord rec;
        rec.document_date = doc;
        rec.author = author;
        rec.recipients = {recipient};
        rec.patient.present = true;
        rec.patient.name = patient;
        rec.patient.birth_date = birth;
        rec.patient.id = id;
        rec.diagnoses = {kase.diagnosis};
        rec.secondary_diagnoses = {rng.pick(kSecondaryDx)};
        rec.history = {
            {HistoryDate{HistoryDate::Precision::kDay, symptoms, std::nullopt},
             std::string("First symptoms with ") + kase.symptom + "."},
            {HistoryDate{HistoryDate::Precision::kDay, imaging, std::nullopt},
             std::string("Diagnosis confirmed by ") + kase.confirmation + "."},
            {HistoryDate{HistoryDate::Precision::kDay, board, std::nullopt},
             std::string("Interdisciplinary tumor conference consensus: ") +
                 kase.treatment + "."},
        };
        rec.treatment_intent =
            planned ? TreatmentIntent::kPlanned : TreatmentIntent::kRecommended;
        rec.treatment = kase.treatment;

        std::ostringstream body;
        body << "Dear colleagues,\n\n";
        body << "We report on our patient " << patient << ", born "
             << date_to_string(birth) << ", who presented at our clinic on "
             << date_to_string(consult) << ".\n\n";
        body << "The diagnosis of " << kase.diagnosis
             << " was confirmed by " << kase.confirmation << ". "
             << "First symptoms with " << kase.symptom << " were noted on "
             << date_to_string(symptoms) << ". "
             << "The interdisciplinary tumor conference of " << date_to_string(board)
             << " recommended " << kase.treatment << ".\n\n";
        if (planned) {
            body << "The patient agreed to the planned treatment with " << kase.treatment
                 << ". The following appointments have already been made for the "
                    "patient:\n\n";
            body << date_to_string(prep) << ": preparation and " << kase.procedure
                 << " check.\n";
            body << date_to_string(session) << ": first session of the " << kase.procedure
                 << ".\n\n";
            body << "We kindly ask for a short report after completion of the "
                    "treatment.\n\n";
        } else {
            body << "We discussed the potential treatment methods with the patient in "
                    "detail and recommended "
                 << kase.treatment
                 << ". At the end of the conversation, the patient stated that the "
                    "patient needs time to consider the recommended treatment and will "
                    "contact us for further coordination.\n\n";
        }
        body << "Kind regards,\n\nProf. Dr. T. Lindner and " << author;
        rec.body = body.str();

        letters.push_back(record_to_text(rec));
    }
    return letters;
}

bool has_consider_phrase(const std::string& text) {
    return text.find("needs time to consider") != std::string::npos;
}

int count_scheduled_dates(const std::string& text) {
    // Schedule entries are lines of the form "dd.mm.yyyy: ...", unlike
    // narrative dates, which sit mid-sentence.
    static const std::regex schedule_re(R"((^|\n)\s*(\d{2})\.(\d{2})\.(\d{4}):)");
    int count = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), schedule_re);
         it != std::sregex_iterator(); ++it) {
        ++count;
    }
    return count;
}

}  // namespace letterlm
