#include <stdio.h>

#include "pitch_strength.h"

int main(void) {
    PsAudioBuffer *tone = NULL;
    if (ps_synth_mauch(220.0, 0.8, 10, 1.0, 48000, &tone) != PS_STATUS_OK) {
        char msg[256];
        ps_last_error_message(msg, sizeof msg);
        fprintf(stderr, "synth: %s\n", msg);
        return 1;
    }
    PsFeatures f;
    if (ps_buffer_features(tone, &f) != PS_STATUS_OK) {
        return 1;
    }
    printf("hr=%.4f flatness=%.4f\n", f.harmonic_ratio, f.flatness);

    PsAudioBuffer *bad = NULL;
    PsStatus s = ps_synth_mauch(5000.0, 0.8, 10, 1.0, 48000, &bad);
    char msg[256];
    ps_last_error_message(msg, sizeof msg);
    printf("status=%d error=%s\n", (int)s, msg);

    ps_audio_free(tone);
    return s == PS_STATUS_INVALID_ARGUMENT && f.harmonic_ratio > 0.9 ? 0 : 1;
}
