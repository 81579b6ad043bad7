from django.apps import AppConfig


class CodecAppConfig(AppConfig):
    name = "codec"
    verbose_name = "M-frame codec"
